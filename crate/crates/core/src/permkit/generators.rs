//! The four key-generation patterns.
//!
//! * Logistic map: `r ← λ·r·(1 − r)`, one orbit value per cell, argsorted.
//! * Lorenz system (σ = 10, ρ = 28, β = 8/3), RK4-integrated, the three
//!   coordinate streams interleaved `a, b, c, a, b, c, …`, argsorted.
//! * GCBPM: Gray-code bijections `I(θ) = gray(θ, β) ⊕ δ` on k-bit indices;
//!   the pixel at `I₁(θ)` moves to `I₂(θ)`.
//! * Coupled map lattice: per-row right cyclic shifts followed by per-column
//!   up cyclic shifts, amounts read from the lattice sites.
//!
//! Every generator threads a [`GeneratorState`] so that round `r + 1`
//! continues where round `r` stopped.

use serde::{Deserialize, Serialize};

use super::{Dims, PBox};
use crate::{Error, Result};

/// Transient iterates discarded from a fresh logistic orbit.
pub const LOGISTIC_TRANSIENT: usize = 1000;
/// Transient RK4 steps discarded from a fresh Lorenz trajectory.
pub const LORENZ_TRANSIENT: usize = 3000;
pub const LORENZ_DT: f64 = 0.01;
/// Logistic parameter of the CML local map τ.
pub const CML_LAMBDA: f64 = 3.99;

const LORENZ_SIGMA: f64 = 10.0;
const LORENZ_RHO: f64 = 28.0;
const LORENZ_BETA: f64 = 8.0 / 3.0;
const CML_SCALE: f64 = 1e16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    Logistic,
    Lorenz,
    Gcbpm,
    Cml,
}

impl PatternKind {
    pub const ALL: [PatternKind; 4] = [
        PatternKind::Logistic,
        PatternKind::Lorenz,
        PatternKind::Gcbpm,
        PatternKind::Cml,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PatternKind::Logistic => "logistic",
            PatternKind::Lorenz => "lorenz",
            PatternKind::Gcbpm => "gcbpm",
            PatternKind::Cml => "cml",
        }
    }
}

impl std::str::FromStr for PatternKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logistic" | "discrete" => Ok(PatternKind::Logistic),
            "lorenz" | "continuous" => Ok(PatternKind::Lorenz),
            "gcbpm" | "gray" => Ok(PatternKind::Gcbpm),
            "cml" => Ok(PatternKind::Cml),
            other => Err(Error::invalid(format!("unknown pattern '{other}'"))),
        }
    }
}

/// Parameters of one key-generation pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pattern", rename_all = "lowercase")]
pub enum PatternSpec {
    Logistic { r0: f64, lambda: f64 },
    Lorenz { a0: f64, b0: f64, c0: f64 },
    Gcbpm { beta1: u32, beta2: u32, delta1: u32, delta2: u32 },
    Cml { x1: f64, y2: f64, eps: f64 },
}

impl PatternSpec {
    pub fn kind(&self) -> PatternKind {
        match self {
            PatternSpec::Logistic { .. } => PatternKind::Logistic,
            PatternSpec::Lorenz { .. } => PatternKind::Lorenz,
            PatternSpec::Gcbpm { .. } => PatternKind::Gcbpm,
            PatternSpec::Cml { .. } => PatternKind::Cml,
        }
    }

    /// The single-round settings used for the 28×28 experiments.
    ///
    /// The Gray-code preset cannot be used verbatim on 784 cells (β₂ = 28 and
    /// 15-bit offsets exceed the 10-bit index domain), so its β₂ is clamped to
    /// the largest admissible value and the offsets are reduced to their low
    /// 10 bits.
    pub fn preset(kind: PatternKind) -> PatternSpec {
        match kind {
            PatternKind::Logistic => PatternSpec::Logistic {
                r0: 0.448,
                lambda: 3.988,
            },
            PatternKind::Lorenz => PatternSpec::Lorenz {
                a0: 6.293,
                b0: -6.749,
                c0: 2.886,
            },
            PatternKind::Gcbpm => PatternSpec::Gcbpm {
                beta1: 1,
                beta2: 8,
                delta1: 29493 & 0x3ff,
                delta2: 23749 & 0x3ff,
            },
            PatternKind::Cml => PatternSpec::Cml {
                x1: 0.31457,
                y2: 0.6532,
                eps: 0.94,
            },
        }
    }

    /// Builds a spec from `key=value` pairs, e.g. `r0=0.448 lambda=3.988`.
    pub fn from_params(kind: PatternKind, params: &[(String, String)]) -> Result<PatternSpec> {
        let get_f = |name: &str| -> Result<Option<f64>> {
            params
                .iter()
                .find(|(k, _)| k == name)
                .map(|(_, v)| {
                    v.parse::<f64>()
                        .map_err(|_| Error::invalid(format!("{name}={v} is not a number")))
                })
                .transpose()
        };
        let get_u = |name: &str| -> Result<Option<u32>> {
            params
                .iter()
                .find(|(k, _)| k == name)
                .map(|(_, v)| {
                    v.parse::<u32>()
                        .map_err(|_| Error::invalid(format!("{name}={v} is not an unsigned integer")))
                })
                .transpose()
        };
        let allowed: &[&str] = match kind {
            PatternKind::Logistic => &["r0", "lambda"],
            PatternKind::Lorenz => &["a0", "b0", "c0"],
            PatternKind::Gcbpm => &["beta1", "beta2", "delta1", "delta2"],
            PatternKind::Cml => &["x1", "y2", "eps"],
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::invalid(format!(
                "unknown parameter '{k}' for pattern {}",
                kind.name()
            )));
        }
        let mut spec = PatternSpec::preset(kind);
        match &mut spec {
            PatternSpec::Logistic { r0, lambda } => {
                *r0 = get_f("r0")?.unwrap_or(*r0);
                *lambda = get_f("lambda")?.unwrap_or(*lambda);
            }
            PatternSpec::Lorenz { a0, b0, c0 } => {
                *a0 = get_f("a0")?.unwrap_or(*a0);
                *b0 = get_f("b0")?.unwrap_or(*b0);
                *c0 = get_f("c0")?.unwrap_or(*c0);
            }
            PatternSpec::Gcbpm {
                beta1,
                beta2,
                delta1,
                delta2,
            } => {
                *beta1 = get_u("beta1")?.unwrap_or(*beta1);
                *beta2 = get_u("beta2")?.unwrap_or(*beta2);
                *delta1 = get_u("delta1")?.unwrap_or(*delta1);
                *delta2 = get_u("delta2")?.unwrap_or(*delta2);
            }
            PatternSpec::Cml { x1, y2, eps } => {
                *x1 = get_f("x1")?.unwrap_or(*x1);
                *y2 = get_f("y2")?.unwrap_or(*y2);
                *eps = get_f("eps")?.unwrap_or(*eps);
            }
        }
        Ok(spec)
    }

    /// Checks the parameter domains; GCBPM limits depend on `dims`.
    pub fn validate(&self, dims: Dims) -> Result<()> {
        let open_unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} = {v} must lie strictly inside (0, 1)")))
            }
        };
        match *self {
            PatternSpec::Logistic { r0, lambda } => {
                open_unit("r0", r0)?;
                if !(lambda > 0.0 && lambda <= 4.0) {
                    return Err(Error::invalid(format!("lambda = {lambda} must lie in (0, 4]")));
                }
            }
            PatternSpec::Lorenz { a0, b0, c0 } => {
                if ![a0, b0, c0].iter().all(|v| v.is_finite()) {
                    return Err(Error::invalid("Lorenz initial point must be finite"));
                }
            }
            PatternSpec::Gcbpm {
                beta1,
                beta2,
                delta1,
                delta2,
            } => {
                let k = gcbpm_index_bits(dims.cells());
                for (name, beta) in [("beta1", beta1), ("beta2", beta2)] {
                    if beta + 1 >= k {
                        return Err(Error::invalid(format!(
                            "{name} = {beta} needs {name} + 1 < k = {k} for {dims}"
                        )));
                    }
                }
                for (name, delta) in [("delta1", delta1), ("delta2", delta2)] {
                    if delta >> k != 0 {
                        return Err(Error::invalid(format!(
                            "{name} = {delta} is not a {k}-bit integer"
                        )));
                    }
                }
                if beta1 == beta2 && delta1 == delta2 {
                    return Err(Error::DegenerateOrbit(
                        "GCBPM with I1 = I2 always yields the identity permutation".into(),
                    ));
                }
            }
            PatternSpec::Cml { x1, y2, eps } => {
                open_unit("x1", x1)?;
                open_unit("y2", y2)?;
                if !(0.0..=1.0).contains(&eps) {
                    return Err(Error::invalid(format!("eps = {eps} must lie in [0, 1]")));
                }
            }
        }
        Ok(())
    }
}

/// Continuation of a generator between rounds.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum GeneratorState {
    #[default]
    Fresh,
    Logistic { r: f64 },
    Lorenz { a: f64, b: f64, c: f64 },
    Gcbpm { round: u64 },
    Cml { lattice: Vec<f64> },
}

/// `γ = θ ⊕ (θ >> (β + 1))` on `k`-bit integers.
pub fn gray(theta: u32, beta: u32, k: u32) -> Result<u32> {
    if k > 32 {
        return Err(Error::invalid(format!("bit width k = {k} exceeds 32")));
    }
    if beta + 1 >= k {
        return Err(Error::invalid(format!(
            "shift amount {} must be smaller than k = {k}",
            beta + 1
        )));
    }
    if k < 32 && theta >> k != 0 {
        return Err(Error::invalid(format!("theta = {theta} is not a {k}-bit integer")));
    }
    Ok(gray_unchecked(theta, beta))
}

#[inline]
fn gray_unchecked(theta: u32, beta: u32) -> u32 {
    theta ^ (theta >> (beta + 1))
}

/// Inverse of [`gray`] for the same `beta`.
pub fn gray_inverse(gamma: u32, beta: u32) -> u32 {
    let shift = beta + 1;
    let mut theta = gamma;
    let mut t = gamma >> shift;
    while t != 0 {
        theta ^= t;
        t >>= shift;
    }
    theta
}

/// Index width used by GCBPM: the smallest `k ≥ 2` with `2^k ≥ cells`.
pub fn gcbpm_index_bits(cells: usize) -> u32 {
    let mut k = 2;
    while (1usize << k) < cells {
        k += 1;
    }
    k
}

/// Argsort of `values` (stable: ties keep their original order).
pub fn rank_permutation(values: &[f64]) -> Result<Vec<u32>> {
    if values.is_empty() {
        return Err(Error::invalid("cannot rank an empty sequence"));
    }
    let mut order: Vec<u32> = (0..values.len() as u32).collect();
    order.sort_by(|&a, &b| values[a as usize].total_cmp(&values[b as usize]));
    Ok(order)
}

/// Generates one round key and the state for the next round.
pub fn gen_pbox(
    spec: &PatternSpec,
    dims: Dims,
    state: &GeneratorState,
) -> Result<(PBox, GeneratorState)> {
    spec.validate(dims)?;
    match spec {
        PatternSpec::Logistic { r0, lambda } => logistic(*r0, *lambda, dims, state),
        PatternSpec::Lorenz { a0, b0, c0 } => lorenz([*a0, *b0, *c0], dims, state),
        PatternSpec::Gcbpm {
            beta1,
            beta2,
            delta1,
            delta2,
        } => gcbpm([*beta1, *beta2], [*delta1, *delta2], dims, state),
        PatternSpec::Cml { x1, y2, eps } => cml(*x1, *y2, *eps, dims, state),
    }
}

fn wrong_state(expected: PatternKind, state: &GeneratorState) -> Error {
    Error::invalid(format!(
        "generator state {state:?} does not belong to pattern {}",
        expected.name()
    ))
}

fn check_orbit(values: &[f64], what: &str) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateOrbit(format!("{what} orbit left the finite range")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    if sorted.len() * 2 < values.len() {
        return Err(Error::DegenerateOrbit(format!(
            "{what} orbit has only {} distinct values for {} cells",
            sorted.len(),
            values.len()
        )));
    }
    Ok(())
}

#[inline]
fn logistic_step(r: f64, lambda: f64) -> f64 {
    lambda * r * (1.0 - r)
}

fn logistic(
    r0: f64,
    lambda: f64,
    dims: Dims,
    state: &GeneratorState,
) -> Result<(PBox, GeneratorState)> {
    let mut r = match state {
        GeneratorState::Fresh => {
            let mut r = r0;
            for _ in 0..LOGISTIC_TRANSIENT {
                r = logistic_step(r, lambda);
            }
            r
        }
        GeneratorState::Logistic { r } => *r,
        other => return Err(wrong_state(PatternKind::Logistic, other)),
    };
    let values: Vec<f64> = (0..dims.cells())
        .map(|_| {
            r = logistic_step(r, lambda);
            r
        })
        .collect();
    check_orbit(&values, "logistic")?;
    let table = rank_permutation(&values)?;
    Ok((PBox::new(dims, table)?, GeneratorState::Logistic { r }))
}

fn lorenz_deriv([a, b, c]: [f64; 3]) -> [f64; 3] {
    [
        LORENZ_SIGMA * (b - a),
        a * (LORENZ_RHO - c) - b,
        a * b - LORENZ_BETA * c,
    ]
}

fn rk4_step(p: [f64; 3], dt: f64) -> [f64; 3] {
    let add = |p: [f64; 3], k: [f64; 3], h: f64| [p[0] + h * k[0], p[1] + h * k[1], p[2] + h * k[2]];
    let k1 = lorenz_deriv(p);
    let k2 = lorenz_deriv(add(p, k1, dt / 2.0));
    let k3 = lorenz_deriv(add(p, k2, dt / 2.0));
    let k4 = lorenz_deriv(add(p, k3, dt));
    std::array::from_fn(|i| p[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

fn lorenz(init: [f64; 3], dims: Dims, state: &GeneratorState) -> Result<(PBox, GeneratorState)> {
    let mut p = match state {
        GeneratorState::Fresh => {
            let mut p = init;
            for _ in 0..LORENZ_TRANSIENT {
                p = rk4_step(p, LORENZ_DT);
            }
            p
        }
        GeneratorState::Lorenz { a, b, c } => [*a, *b, *c],
        other => return Err(wrong_state(PatternKind::Lorenz, other)),
    };
    let n = dims.cells();
    let mut values = Vec::with_capacity(n + 2);
    while values.len() < n {
        p = rk4_step(p, LORENZ_DT);
        values.extend_from_slice(&p);
    }
    values.truncate(n);
    check_orbit(&values, "Lorenz")?;
    let table = rank_permutation(&values)?;
    Ok((
        PBox::new(dims, table)?,
        GeneratorState::Lorenz {
            a: p[0],
            b: p[1],
            c: p[2],
        },
    ))
}

fn gcbpm(
    beta: [u32; 2],
    spec_delta: [u32; 2],
    dims: Dims,
    state: &GeneratorState,
) -> Result<(PBox, GeneratorState)> {
    let k = gcbpm_index_bits(dims.cells());
    let mask = ((1u64 << k) - 1) as u32;
    let round = match state {
        GeneratorState::Fresh => 0,
        GeneratorState::Gcbpm { round } => *round,
        other => return Err(wrong_state(PatternKind::Gcbpm, other)),
    };
    // F(x) = A·x ⊕ c with A = G₂G₁⁻¹ linear, so only c = A·δ₁ ⊕ δ₂ matters.
    // Round r offsets δ₂ by the Gray code of r, which gives 2^k distinct keys
    // before the schedule repeats.
    let delta = [
        spec_delta[0],
        spec_delta[1] ^ (gray_unchecked((round & mask as u64) as u32, beta[1]) & mask),
    ];
    // F = I2 ∘ I1⁻¹ is a bijection on [0, 2^k); cycle-walking restricts it to
    // the valid cell range.
    let f = |x: u32| gray_unchecked(gray_inverse(x ^ delta[0], beta[0]), beta[1]) ^ delta[1];
    let n = dims.cells() as u32;
    let table = (0..n)
        .map(|x| {
            let mut y = f(x);
            while y >= n {
                y = f(y);
            }
            y
        })
        .collect();
    Ok((PBox::new(dims, table)?, GeneratorState::Gcbpm { round: round + 1 }))
}

fn cml_tau(x: f64) -> f64 {
    CML_LAMBDA * x * (1.0 - x)
}

fn cml_step(lattice: &[f64], eps: f64) -> Vec<f64> {
    let l = lattice.len();
    (0..l)
        .map(|k| {
            let left = lattice[(k + l - 1) % l];
            (1.0 - eps) * cml_tau(lattice[k]) + eps * cml_tau(left)
        })
        .collect()
}

fn cml_shift(v: f64, modulus: usize) -> usize {
    ((v * CML_SCALE).floor() as u64 % modulus as u64) as usize
}

fn cml(x1: f64, y2: f64, eps: f64, dims: Dims, state: &GeneratorState) -> Result<(PBox, GeneratorState)> {
    let (m, n) = (dims.rows, dims.cols);
    let width = m.max(n);
    let mut lattice = match state {
        GeneratorState::Fresh => {
            let mut init = Vec::with_capacity(width);
            init.push(x1);
            if width > 1 {
                init.push(y2);
            }
            let mut v = x1;
            while init.len() < width {
                v = cml_tau(v);
                init.push(v);
            }
            init
        }
        GeneratorState::Cml { lattice } if lattice.len() == width => lattice.clone(),
        GeneratorState::Cml { lattice } => {
            return Err(Error::invalid(format!(
                "CML state has {} sites, {dims} needs {width}",
                lattice.len()
            )))
        }
        other => return Err(wrong_state(PatternKind::Cml, other)),
    };
    for _ in 0..width {
        lattice = cml_step(&lattice, eps);
    }
    check_orbit(&lattice, "CML")?;
    let row_shift: Vec<usize> = lattice[..m].iter().map(|&v| cml_shift(v, n)).collect();
    lattice = cml_step(&lattice, eps);
    check_orbit(&lattice, "CML")?;
    let col_shift: Vec<usize> = lattice[..n].iter().map(|&v| cml_shift(v, m)).collect();

    let mut table = vec![0u32; m * n];
    for i in 0..m {
        for j in 0..n {
            // right cyclic shift of row i, then up cyclic shift of the landing column
            let j2 = (j + row_shift[i]) % n;
            let i2 = (i + m - col_shift[j2]) % m;
            table[i * n + j] = (i2 * n + j2) as u32;
        }
    }
    Ok((PBox::new(dims, table)?, GeneratorState::Cml { lattice }))
}
