//! MUSCL piecewise-linear reconstruction.
//!
//! All routines work on a *line* of cell averages that already includes
//! `GHOST` ghost cells on each side, so the same code serves 1D fields and
//! the rows/columns of 2D fields.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limiters::LimiterKind;
use crate::physics::{ConservationLaw, State};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    Componentwise,
    Characteristic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReconstructionConfig {
    pub limiter: LimiterKind,
    pub basis: Basis,
}

impl ReconstructionConfig {
    pub fn componentwise(limiter: LimiterKind) -> Self {
        ReconstructionConfig {
            limiter,
            basis: Basis::Componentwise,
        }
    }

    pub fn characteristic(limiter: LimiterKind) -> Self {
        ReconstructionConfig {
            limiter,
            basis: Basis::Characteristic,
        }
    }
}

/// Per-cell slopes `u'_j` over a line; the two end cells hold zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Slopes<const K: usize> {
    pub values: Vec<State<K>>,
    /// Cells where the eigensystem was unavailable and componentwise
    /// limiting was used instead.
    pub fallbacks: usize,
}

/// Interface states `(u⁻, u⁺)` for the `n + 1` interfaces of a line of
/// `n + 2*GHOST` cells, ordered left to right.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceStates<const K: usize> {
    pub states: Vec<(State<K>, State<K>)>,
    pub fallbacks: usize,
}

#[inline]
pub fn limit<const K: usize>(limiter: &LimiterKind, a: &State<K>, b: &State<K>) -> State<K> {
    a.zip_map(b, |x, y| limiter.apply(x, y))
}

fn require_eigensystem<const K: usize, L: ConservationLaw<K>>(law: &L) -> Result<()> {
    if !law.provides_eigensystem() {
        return Err(Error::Config(
            "characteristic reconstruction needs a law with an eigensystem".into(),
        ));
    }
    Ok(())
}

/// Limited slopes for every cell that has two neighbours in `cells`.
///
/// In characteristic mode both one-sided differences are decomposed in the
/// eigenbasis of the cell's own state, limited per characteristic field,
/// and recomposed.
pub fn slopes<const K: usize, L: ConservationLaw<K>>(
    cells: &[State<K>],
    cfg: &ReconstructionConfig,
    law: &L,
) -> Result<Slopes<K>> {
    let m = cells.len();
    let mut values = vec![State::<K>::zeros(); m];
    let mut fallbacks = 0;
    if cfg.basis == Basis::Characteristic {
        require_eigensystem(law)?;
    }
    for j in 1..m.saturating_sub(1) {
        let back = cells[j] - cells[j - 1];
        let fwd = cells[j + 1] - cells[j];
        values[j] = match cfg.basis {
            Basis::Componentwise => limit(&cfg.limiter, &back, &fwd),
            Basis::Characteristic => match law.eigensystem(&cells[j]) {
                Some(es) => {
                    let s = limit(&cfg.limiter, &es.decompose(&back), &es.decompose(&fwd));
                    es.recompose(&s)
                }
                None => {
                    fallbacks += 1;
                    limit(&cfg.limiter, &back, &fwd)
                }
            },
        };
    }
    if fallbacks > 0 {
        debug!("slopes: {fallbacks} cells fell back to componentwise limiting");
    }
    Ok(Slopes { values, fallbacks })
}

/// `u⁻_{j+1/2} = ū_j + u'_j/2`, `u⁺_{j+1/2} = ū_{j+1} - u'_{j+1}/2`.
pub fn interface_states<const K: usize>(cells: &[State<K>], slopes: &[State<K>]) -> Vec<(State<K>, State<K>)> {
    let m = cells.len();
    (1..m.saturating_sub(2))
        .map(|c| {
            (
                cells[c] + slopes[c] * 0.5,
                cells[c + 1] - slopes[c + 1] * 0.5,
            )
        })
        .collect()
}

/// Interface states for a semi-discrete scheme.
///
/// Componentwise: per-cell slopes, then [`interface_states`].
/// Characteristic: each interface gets its own eigenbasis, evaluated at the
/// arithmetic average of the two adjacent cells; the three differences
/// around the interface are projected onto it, limited, and the two
/// one-sided extrapolations are mapped back to conserved variables.
pub fn reconstruct_interfaces<const K: usize, L: ConservationLaw<K>>(
    cells: &[State<K>],
    cfg: &ReconstructionConfig,
    law: &L,
) -> Result<InterfaceStates<K>> {
    match cfg.basis {
        Basis::Componentwise => {
            let s = slopes(cells, cfg, law)?;
            Ok(InterfaceStates {
                states: interface_states(cells, &s.values),
                fallbacks: 0,
            })
        }
        Basis::Characteristic => {
            let m = cells.len();
            require_eigensystem(law)?;
            let mut fallbacks = 0;
            let mut states = Vec::with_capacity(m.saturating_sub(3));
            for c in 1..m.saturating_sub(2) {
                let d_left = cells[c] - cells[c - 1];
                let d_mid = cells[c + 1] - cells[c];
                let d_right = cells[c + 2] - cells[c + 1];
                let avg = (cells[c] + cells[c + 1]) * 0.5;
                let (s_left, s_right) = match law.eigensystem(&avg) {
                    Some(es) => {
                        let (a_l, a_m, a_r) = (es.decompose(&d_left), es.decompose(&d_mid), es.decompose(&d_right));
                        (
                            es.recompose(&limit(&cfg.limiter, &a_l, &a_m)),
                            es.recompose(&limit(&cfg.limiter, &a_m, &a_r)),
                        )
                    }
                    None => {
                        fallbacks += 1;
                        (
                            limit(&cfg.limiter, &d_left, &d_mid),
                            limit(&cfg.limiter, &d_mid, &d_right),
                        )
                    }
                };
                states.push((cells[c] + s_left * 0.5, cells[c + 1] - s_right * 0.5));
            }
            if fallbacks > 0 {
                debug!("reconstruct_interfaces: {fallbacks} interfaces fell back to componentwise limiting");
            }
            Ok(InterfaceStates { states, fallbacks })
        }
    }
}
