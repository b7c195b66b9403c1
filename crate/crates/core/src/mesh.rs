//! Uniform grids, cell-average fields with ghost layers, and boundary conditions.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::physics::State;

/// Ghost cells on each side of every field. Covers the MUSCL stencil plus
/// the flux/staggered update.
pub const GHOST: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub dx: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::Config(format!("a grid needs at least 4 cells, got {n}")));
        }
        let dx = (x_max - x_min) / n as f64;
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::Config(format!("invalid extent [{x_min}, {x_max}]")));
        }
        Ok(Grid1D { x_min, x_max, n, dx })
    }

    /// Center of cell `j` (may be a ghost index).
    #[inline]
    pub fn center(&self, j: isize) -> f64 {
        self.x_min + (j as f64 + 0.5) * self.dx
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D {
    pub x: Grid1D,
    pub y: Grid1D,
}

impl Grid2D {
    pub fn new(x: (f64, f64, usize), y: (f64, f64, usize)) -> Result<Self> {
        Ok(Grid2D {
            x: Grid1D::new(x.0, x.1, x.2)?,
            y: Grid1D::new(y.0, y.1, y.2)?,
        })
    }

    pub fn nx(&self) -> usize {
        self.x.n
    }

    pub fn ny(&self) -> usize {
        self.y.n
    }
}

/// State as a function of `(x, y, t)`; 1D callers pass `y = 0`.
pub type StateFn<const K: usize> = Arc<dyn Fn(f64, f64, f64) -> State<K> + Send + Sync>;

pub enum BoundaryCondition<const K: usize> {
    Periodic,
    ZeroGradient,
    /// Mirror all components and negate `normal_component` (the momentum
    /// normal to the wall).
    ReflectiveWall { normal_component: usize },
    /// Ghost cells take the supplied state evaluated at their centers.
    TimeDependentDirichlet(StateFn<K>),
    /// Use `before` where the tangential coordinate is `< at`, else `after`.
    /// Only meaningful on 2D sides.
    Split {
        at: f64,
        before: Box<BoundaryCondition<K>>,
        after: Box<BoundaryCondition<K>>,
    },
}

impl<const K: usize> Clone for BoundaryCondition<K> {
    fn clone(&self) -> Self {
        match self {
            Self::Periodic => Self::Periodic,
            Self::ZeroGradient => Self::ZeroGradient,
            Self::ReflectiveWall { normal_component } => Self::ReflectiveWall {
                normal_component: *normal_component,
            },
            Self::TimeDependentDirichlet(f) => Self::TimeDependentDirichlet(Arc::clone(f)),
            Self::Split { at, before, after } => Self::Split {
                at: *at,
                before: before.clone(),
                after: after.clone(),
            },
        }
    }
}

impl<const K: usize> fmt::Debug for BoundaryCondition<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Periodic => write!(f, "Periodic"),
            Self::ZeroGradient => write!(f, "ZeroGradient"),
            Self::ReflectiveWall { normal_component } => {
                write!(f, "ReflectiveWall({normal_component})")
            }
            Self::TimeDependentDirichlet(_) => write!(f, "TimeDependentDirichlet(..)"),
            Self::Split { at, before, after } => write!(f, "Split({at}: {before:?} | {after:?})"),
        }
    }
}

impl<const K: usize> BoundaryCondition<K> {
    fn is_periodic(&self) -> bool {
        matches!(self, Self::Periodic)
    }

    fn select(&self, tangential: f64) -> &Self {
        match self {
            Self::Split { at, before, after } => {
                if tangential < *at {
                    before.select(tangential)
                } else {
                    after.select(tangential)
                }
            }
            other => other,
        }
    }

    fn contains_split(&self) -> bool {
        matches!(self, Self::Split { .. })
    }
}

/// Ghost fill for one end of a line of cells.
///
/// `line` holds `n + 2*GHOST` entries; `centers(k)` gives the coordinate
/// of storage cell `k` along the line. `position(s)` maps that coordinate
/// to `(x, y)` for Dirichlet evaluation.
fn fill_line_end<const K: usize>(
    bc: &BoundaryCondition<K>,
    line: &mut [State<K>],
    right_end: bool,
    t: f64,
    position: &dyn Fn(usize) -> (f64, f64),
) {
    let n = line.len() - 2 * GHOST;
    for k in 0..GHOST {
        // ghost storage index and its mirror/copy sources
        let (ghost, mirror, wrap, nearest) = if right_end {
            (GHOST + n + k, GHOST + n - 1 - k, GHOST + k, GHOST + n - 1)
        } else {
            (GHOST - 1 - k, GHOST + k, GHOST + n - 1 - k, GHOST)
        };
        line[ghost] = match bc {
            BoundaryCondition::Periodic => line[wrap],
            BoundaryCondition::ZeroGradient => line[nearest],
            BoundaryCondition::ReflectiveWall { normal_component } => {
                let mut s = line[mirror];
                s[*normal_component] = -s[*normal_component];
                s
            }
            BoundaryCondition::TimeDependentDirichlet(f) => {
                let (x, y) = position(ghost);
                f(x, y, t)
            }
            BoundaryCondition::Split { .. } => unreachable!("split resolved by caller"),
        };
    }
}

#[derive(Clone, Debug)]
pub struct BoundarySet1D<const K: usize> {
    pub left: BoundaryCondition<K>,
    pub right: BoundaryCondition<K>,
}

impl<const K: usize> BoundarySet1D<K> {
    pub fn new(left: BoundaryCondition<K>, right: BoundaryCondition<K>) -> Result<Self> {
        let set = BoundarySet1D { left, right };
        set.validate()?;
        Ok(set)
    }

    pub fn periodic() -> Self {
        BoundarySet1D {
            left: BoundaryCondition::Periodic,
            right: BoundaryCondition::Periodic,
        }
    }

    pub fn zero_gradient() -> Self {
        BoundarySet1D {
            left: BoundaryCondition::ZeroGradient,
            right: BoundaryCondition::ZeroGradient,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.left.is_periodic() != self.right.is_periodic() {
            return Err(Error::Config("periodic boundaries must be paired on opposing sides".into()));
        }
        if self.left.contains_split() || self.right.contains_split() {
            return Err(Error::Config("split boundaries are only defined in 2D".into()));
        }
        Ok(())
    }

    pub fn is_periodic(&self) -> bool {
        self.left.is_periodic()
    }
}

#[derive(Clone, Debug)]
pub struct BoundarySet2D<const K: usize> {
    pub left: BoundaryCondition<K>,
    pub right: BoundaryCondition<K>,
    pub bottom: BoundaryCondition<K>,
    pub top: BoundaryCondition<K>,
}

impl<const K: usize> BoundarySet2D<K> {
    pub fn validate(&self) -> Result<()> {
        if self.left.is_periodic() != self.right.is_periodic()
            || self.bottom.is_periodic() != self.top.is_periodic()
        {
            return Err(Error::Config("periodic boundaries must be paired on opposing sides".into()));
        }
        Ok(())
    }
}

/// Cell averages on a 1D grid, `GHOST` ghost cells per side.
///
/// A staggered field lives on the half-shifted grid: its cell `j` is
/// centered at `x_{j+1/2} = x_min + (j+1) dx`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field1D<const K: usize> {
    pub grid: Grid1D,
    pub data: Vec<State<K>>,
    pub t: f64,
    pub staggered: bool,
}

impl<const K: usize> Field1D<K> {
    pub fn zeros(grid: Grid1D) -> Self {
        Field1D {
            grid,
            data: vec![State::<K>::zeros(); grid.n + 2 * GHOST],
            t: 0.0,
            staggered: false,
        }
    }

    pub fn from_interior(grid: Grid1D, values: &[State<K>]) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::Config(format!(
                "expected {} cell values, got {}",
                grid.n,
                values.len()
            )));
        }
        let mut f = Self::zeros(grid);
        f.interior_mut().copy_from_slice(values);
        Ok(f)
    }

    /// Point values `f(x_j)` at the cell centers.
    pub fn from_point_values(grid: Grid1D, f: impl Fn(f64) -> State<K>) -> Self {
        let mut field = Self::zeros(grid);
        for j in 0..grid.n {
            field.data[GHOST + j] = f(grid.center(j as isize));
        }
        field
    }

    /// Exact-ish cell averages of `f`; `breaks` lists discontinuity locations.
    pub fn from_cell_averages(grid: Grid1D, f: impl Fn(f64) -> State<K>, breaks: &[f64]) -> Self {
        let mut field = Self::zeros(grid);
        for j in 0..grid.n {
            let a = grid.x_min + j as f64 * grid.dx;
            field.data[GHOST + j] = cell_average(&f, a, a + grid.dx, breaks);
        }
        field
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn interior(&self) -> &[State<K>] {
        &self.data[GHOST..GHOST + self.grid.n]
    }

    pub fn interior_mut(&mut self) -> &mut [State<K>] {
        let n = self.grid.n;
        &mut self.data[GHOST..GHOST + n]
    }

    /// Value at interior index `j` (negative or `>= n` reach into ghosts).
    #[inline]
    pub fn at(&self, j: isize) -> &State<K> {
        &self.data[(j + GHOST as isize) as usize]
    }

    /// Center of cell `j`, accounting for staggering.
    pub fn center(&self, j: isize) -> f64 {
        let shift = if self.staggered { 0.5 * self.grid.dx } else { 0.0 };
        self.grid.center(j) + shift
    }

    /// `Σ_j ū_j Δx` per component.
    pub fn total_mass(&self) -> State<K> {
        self.interior().iter().fold(State::<K>::zeros(), |acc, u| acc + u) * self.grid.dx
    }

    pub fn all_finite(&self) -> bool {
        self.interior().iter().all(|u| u.iter().all(|v| v.is_finite()))
    }

    /// Component `m` of the interior cells.
    pub fn component(&self, m: usize) -> Vec<f64> {
        self.interior().iter().map(|u| u[m]).collect()
    }
}

pub fn apply_bc_1d<const K: usize>(
    field: &mut Field1D<K>,
    bcs: &BoundarySet1D<K>,
    t: f64,
) -> Result<()> {
    bcs.validate()?;
    let grid = field.grid;
    let shift = if field.staggered { 0.5 * grid.dx } else { 0.0 };
    let pos = |k: usize| (grid.center(k as isize - GHOST as isize) + shift, 0.0);
    fill_line_end(&bcs.left, &mut field.data, false, t, &pos);
    fill_line_end(&bcs.right, &mut field.data, true, t, &pos);
    Ok(())
}

/// Projects a staggered field back onto the base grid by averaging
/// neighbouring staggered cells. Ghost cells of `field` must be filled.
pub fn destagger<const K: usize>(field: &Field1D<K>) -> Result<Field1D<K>> {
    if !field.staggered {
        return Err(Error::Config("destagger expects a staggered field".into()));
    }
    let mut out = Field1D::zeros(field.grid);
    out.t = field.t;
    for j in 0..field.n() as isize {
        out.data[GHOST + j as usize] = (field.at(j - 1) + field.at(j)) * 0.5;
    }
    Ok(out)
}

/// Cell averages on a 2D grid, stored row-major (x fastest) with ghosts.
#[derive(Clone, Debug, PartialEq)]
pub struct Field2D<const K: usize> {
    pub grid: Grid2D,
    pub data: Vec<State<K>>,
    pub t: f64,
}

impl<const K: usize> Field2D<K> {
    pub fn zeros(grid: Grid2D) -> Self {
        let len = (grid.nx() + 2 * GHOST) * (grid.ny() + 2 * GHOST);
        Field2D {
            grid,
            data: vec![State::<K>::zeros(); len],
            t: 0.0,
        }
    }

    pub fn from_point_values(grid: Grid2D, f: impl Fn(f64, f64) -> State<K>) -> Self {
        let mut field = Self::zeros(grid);
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let idx = field.index(i as isize, j as isize);
                field.data[idx] = f(grid.x.center(i as isize), grid.y.center(j as isize));
            }
        }
        field
    }

    #[inline]
    pub fn stride(&self) -> usize {
        self.grid.nx() + 2 * GHOST
    }

    /// Storage index of interior-relative `(i, j)`.
    #[inline]
    pub fn index(&self, i: isize, j: isize) -> usize {
        let g = GHOST as isize;
        ((j + g) as usize) * self.stride() + (i + g) as usize
    }

    #[inline]
    pub fn at(&self, i: isize, j: isize) -> &State<K> {
        &self.data[self.index(i, j)]
    }

    #[inline]
    pub fn at_mut(&mut self, i: isize, j: isize) -> &mut State<K> {
        let idx = self.index(i, j);
        &mut self.data[idx]
    }

    pub fn interior_iter(&self) -> impl Iterator<Item = &State<K>> + '_ {
        let (nx, ny) = (self.grid.nx() as isize, self.grid.ny() as isize);
        (0..ny).flat_map(move |j| (0..nx).map(move |i| self.at(i, j)))
    }

    /// Row `j` including ghosts, `nx + 2*GHOST` entries.
    pub fn row(&self, j: isize) -> &[State<K>] {
        let start = self.index(-(GHOST as isize), j);
        &self.data[start..start + self.stride()]
    }

    /// Column `i` including ghosts, `ny + 2*GHOST` entries.
    pub fn column(&self, i: isize) -> Vec<State<K>> {
        let g = GHOST as isize;
        (-g..self.grid.ny() as isize + g).map(|j| *self.at(i, j)).collect()
    }

    pub fn total_mass(&self) -> State<K> {
        self.interior_iter().fold(State::<K>::zeros(), |acc, u| acc + u) * (self.grid.x.dx * self.grid.y.dx)
    }

    pub fn all_finite(&self) -> bool {
        self.interior_iter().all(|u| u.iter().all(|v| v.is_finite()))
    }
}

pub fn apply_bc_2d<const K: usize>(
    field: &mut Field2D<K>,
    bcs: &BoundarySet2D<K>,
    t: f64,
) -> Result<()> {
    bcs.validate()?;
    let grid = field.grid;
    let (nx, ny) = (grid.nx(), grid.ny());
    let g = GHOST as isize;

    // x-sides, one interior row at a time
    let mut line = vec![State::<K>::zeros(); nx + 2 * GHOST];
    for j in 0..ny as isize {
        let y = grid.y.center(j);
        line.copy_from_slice(field.row(j));
        let pos = |k: usize| (grid.x.center(k as isize - g), y);
        fill_line_end(bcs.left.select(y), &mut line, false, t, &pos);
        fill_line_end(bcs.right.select(y), &mut line, true, t, &pos);
        let start = field.index(-g, j);
        field.data[start..start + line.len()].copy_from_slice(&line);
    }

    // y-sides, one interior column at a time
    let mut col = vec![State::<K>::zeros(); ny + 2 * GHOST];
    for i in 0..nx as isize {
        let x = grid.x.center(i);
        for (k, c) in col.iter_mut().enumerate() {
            *c = *field.at(i, k as isize - g);
        }
        let pos = |k: usize| (x, grid.y.center(k as isize - g));
        fill_line_end(bcs.bottom.select(x), &mut col, false, t, &pos);
        fill_line_end(bcs.top.select(x), &mut col, true, t, &pos);
        for (k, c) in col.iter().enumerate() {
            *field.at_mut(i, k as isize - g) = *c;
        }
    }
    Ok(())
}

const GAUSS5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GAUSS5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Average of `f` over `[a, b]`, split at any `breaks` inside the interval
/// and integrated with 5-point Gauss–Legendre on each smooth piece.
pub fn cell_average<const K: usize>(
    f: &impl Fn(f64) -> State<K>,
    a: f64,
    b: f64,
    breaks: &[f64],
) -> State<K> {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let mut acc = State::<K>::zeros();
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (x, wt) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS.iter()) {
            acc += f(mid + half * x) * (wt * half);
        }
    }
    acc / (b - a)
}
