//! Attitude-space sweeps: classify every cell of an (alpha_1, ..., alpha_n)
//! grid analytically (n = 2) and/or by simulation (any n), trace the analytic
//! boundary curves, and aggregate agreement statistics.
//!
//! Cells are independent, so with the `parallel` feature they are evaluated
//! on the rayon pool; results are identical for any worker count including
//! the sequential fallback.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{classify_two, invariant_m, Classification, Regime};
use crate::error::{Error, Result};
use crate::model::{GlobalParams, IndividualConfig};
use crate::sim::{
    empirical_classify, simulate_opts, SimConfig, SimOptions, DEFAULT_EVENT_TOL,
    DEFAULT_HORIZON_PERIODS,
};

/// Inclusive sampling of [lo, hi] with `steps` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl AxisRange {
    pub fn value(&self, k: usize) -> f64 {
        if self.steps == 1 {
            return self.lo;
        }
        self.lo + (self.hi - self.lo) * k as f64 / (self.steps - 1) as f64
    }

    pub fn step_width(&self) -> f64 {
        if self.steps <= 1 {
            0.0
        } else {
            (self.hi - self.lo) / (self.steps - 1) as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Analytic,
    Simulated,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub params: GlobalParams,
    /// One range per individual.
    pub alpha_ranges: Vec<AxisRange>,
    pub mode: SweepMode,
    /// Simulation horizon per cell, in units of the cell's shortest unaided
    /// period.
    #[serde(default = "default_horizon")]
    pub horizon_periods: u32,
    #[serde(default = "default_event_tol")]
    pub event_tol: f64,
}

fn default_horizon() -> u32 {
    DEFAULT_HORIZON_PERIODS
}

fn default_event_tol() -> f64 {
    DEFAULT_EVENT_TOL
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let fail = |reason: String| Err(Error::InvalidSweepSpec { reason });
        if self.alpha_ranges.len() != self.params.n {
            return fail(format!(
                "expected {} alpha ranges, got {}",
                self.params.n,
                self.alpha_ranges.len()
            ));
        }
        for (i, r) in self.alpha_ranges.iter().enumerate() {
            if !(r.lo.is_finite() && r.hi.is_finite() && r.lo <= r.hi) {
                return fail(format!("axis {i}: lo must not exceed hi"));
            }
            if !(r.lo.abs() < 1.0 && r.hi.abs() < 1.0) {
                return fail(format!("axis {i}: range must lie inside (-1, 1)"));
            }
            if r.steps < 2 {
                return fail(format!("axis {i}: need at least 2 steps"));
            }
        }
        if matches!(self.mode, SweepMode::Analytic | SweepMode::Both) && self.params.n != 2 {
            return fail("analytic classification needs exactly 2 individuals".to_string());
        }
        if !(self.event_tol > 0.0 && self.event_tol.is_finite()) {
            return fail("event_tol must be positive and finite".to_string());
        }
        if self.horizon_periods == 0 {
            return fail("horizon_periods must be at least 1".to_string());
        }
        Ok(())
    }

    pub fn shape(&self) -> Vec<usize> {
        self.alpha_ranges.iter().map(|r| r.steps).collect()
    }

    pub fn cell_count(&self) -> usize {
        self.alpha_ranges.iter().map(|r| r.steps).product()
    }

    /// Grid coordinates of a flat row-major index (last axis fastest).
    pub fn alphas_at(&self, flat: usize) -> Vec<f64> {
        let mut idx = flat;
        let mut coords = vec![0usize; self.alpha_ranges.len()];
        for (axis, r) in self.alpha_ranges.iter().enumerate().rev() {
            coords[axis] = idx % r.steps;
            idx /= r.steps;
        }
        coords
            .iter()
            .zip(&self.alpha_ranges)
            .map(|(&k, r)| r.value(k))
            .collect()
    }
}

/// One evaluated grid cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellOutcome {
    pub alphas: Vec<f64>,
    pub margins: Vec<f64>,
    /// Invariant M when the analytic route computed it.
    pub invariant: Option<f64>,
    pub analytic: Option<Classification>,
    pub empirical: Option<Classification>,
    /// Tag agreement; `None` when either side is missing or the empirical
    /// side is Undetermined.
    pub agreement: Option<bool>,
    pub error: Option<String>,
}

impl CellOutcome {
    /// The classification of record: analytic when present, else empirical.
    pub fn record(&self) -> Option<&Classification> {
        self.analytic.as_ref().or(self.empirical.as_ref())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ClassCounts {
    pub no_action: usize,
    pub partial_action: usize,
    pub full_action: usize,
    pub undetermined: usize,
    pub error: usize,
}

impl ClassCounts {
    fn add(&mut self, regime: Regime) {
        match regime {
            Regime::NoAction => self.no_action += 1,
            Regime::PartialAction => self.partial_action += 1,
            Regime::FullAction => self.full_action += 1,
            Regime::Undetermined => self.undetermined += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub counts: ClassCounts,
    /// Cells with both classifications, excluding empirical Undetermined.
    pub compared: usize,
    pub agreeing: usize,
    /// Undetermined-empirical cells excluded from the agreement rate.
    pub excluded: usize,
    pub agreement_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub shape: Vec<usize>,
    /// Row-major cell outcomes (last axis fastest).
    pub cells: Vec<CellOutcome>,
    /// The margin-zero boundary (an L through the corner when it cuts both
    /// axes), in (alpha1, alpha2) coordinates. Empty for n != 2.
    pub boundary_linear: Vec<[f64; 2]>,
    /// The M = 0 curve, both wings, ordered through the triple point.
    /// Empty for n != 2 or when no positive-margin samples exist.
    pub boundary_m0: Vec<[f64; 2]>,
    pub summary: SweepSummary,
}

fn eval_cell(spec: &SweepSpec, flat: usize) -> CellOutcome {
    let params = &spec.params;
    let alphas = spec.alphas_at(flat);
    let margins: Vec<f64> = alphas.iter().map(|&a| params.margin(a)).collect();
    let mut errors: Vec<String> = Vec::new();

    let analytic = if matches!(spec.mode, SweepMode::Analytic | SweepMode::Both) {
        match classify_two(params, alphas[0], alphas[1]) {
            Ok(c) => Some(c),
            Err(e) => {
                errors.push(format!("analytic: {e}"));
                None
            }
        }
    } else {
        None
    };

    let empirical = if matches!(spec.mode, SweepMode::Simulated | SweepMode::Both) {
        let run = || -> Result<Classification> {
            let individuals: Vec<IndividualConfig> = alphas
                .iter()
                .map(|&a| IndividualConfig::new(a, 0.0, 0.0))
                .collect::<Result<_>>()?;
            let cfg = SimConfig::derive(params, &alphas, spec.horizon_periods, spec.event_tol)?;
            let opts = SimOptions {
                record_samples: false,
                threshold_exempt: vec![],
            };
            let traj = simulate_opts(params, &individuals, &cfg, &opts)?;
            Ok(empirical_classify(&traj, params, &cfg))
        };
        match run() {
            Ok(c) => Some(c),
            Err(e) => {
                errors.push(format!("simulated: {e}"));
                None
            }
        }
    } else {
        None
    };

    let agreement = match (&analytic, &empirical) {
        (Some(a), Some(e)) if e.regime != Regime::Undetermined => Some(a.regime == e.regime),
        _ => None,
    };
    let invariant = analytic
        .as_ref()
        .and_then(|c| c.evidence.invariant)
        .or_else(|| {
            // still worth recording for mixed-margin cells in simulated mode
            if params.n == 2 {
                invariant_m(params, alphas[0].max(alphas[1]), alphas[0].min(alphas[1])).ok()
            } else {
                None
            }
        });

    CellOutcome {
        alphas,
        margins,
        invariant,
        analytic,
        empirical,
        agreement,
        error: if errors.is_empty() {
            None
        } else {
            Some(errors.join("; "))
        },
    }
}

/// Evaluates every cell of the grid. Per-cell failures are recorded in the
/// cell, never aborting the sweep; the result is independent of evaluation
/// order and worker count.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let total = spec.cell_count();

    #[cfg(feature = "parallel")]
    let cells: Vec<CellOutcome> = (0..total)
        .into_par_iter()
        .map(|flat| eval_cell(spec, flat))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let cells: Vec<CellOutcome> = (0..total).map(|flat| eval_cell(spec, flat)).collect();

    let mut counts = ClassCounts::default();
    let mut compared = 0usize;
    let mut agreeing = 0usize;
    let mut excluded = 0usize;
    for cell in &cells {
        match cell.record() {
            Some(c) => counts.add(c.regime),
            None => counts.error += 1,
        }
        match cell.agreement {
            Some(true) => {
                compared += 1;
                agreeing += 1;
            }
            Some(false) => compared += 1,
            None => {
                if matches!(
                    cell.empirical.as_ref().map(|c| c.regime),
                    Some(Regime::Undetermined)
                ) {
                    excluded += 1;
                }
            }
        }
    }
    let agreement_rate = (compared > 0).then(|| agreeing as f64 / compared as f64);

    let (boundary_linear, boundary_m0) = if spec.params.n == 2 {
        (linear_boundary(spec), m0_boundary(spec))
    } else {
        (vec![], vec![])
    };

    Ok(SweepResult {
        spec: spec.clone(),
        shape: spec.shape(),
        cells,
        boundary_linear,
        boundary_m0,
        summary: SweepSummary {
            counts,
            compared,
            agreeing,
            excluded,
            agreement_rate,
        },
    })
}

/// Attitude at which the margin vanishes, when defined.
pub fn margin_zero_alpha(params: &GlobalParams) -> Option<f64> {
    (params.sigma_a > 0.0).then(|| params.sigma_s * params.mu_s / params.sigma_a)
}

fn linear_boundary(spec: &SweepSpec) -> Vec<[f64; 2]> {
    let Some(ac) = margin_zero_alpha(&spec.params) else {
        return vec![];
    };
    let r1 = &spec.alpha_ranges[0];
    let r2 = &spec.alpha_ranges[1];
    let on1 = r1.lo <= ac && ac <= r1.hi;
    let on2 = r2.lo <= ac && ac <= r2.hi;
    match (on1, on2) {
        // the L around the no-action rectangle, through the corner
        (true, true) => vec![[ac, r2.lo], [ac, ac], [r1.lo, ac]],
        (true, false) => vec![[ac, r2.lo], [ac, r2.hi.min(ac)]],
        (false, true) => vec![[r1.hi.min(ac), ac], [r1.lo, ac]],
        (false, false) => vec![],
    }
}

/// Root of M(alpha1, alpha2) = 0 in alpha2 over the negative-margin interval
/// (-1, margin-zero point], bisected to 1e-10. `Ok(None)` when M does not
/// change sign there.
pub fn m_zero_alpha2(params: &GlobalParams, alpha1: f64) -> Result<Option<f64>> {
    if !(params.margin(alpha1) > 0.0) {
        return Err(Error::NonPositiveMarginInRange { alpha1 });
    }
    let ac = params.sigma_s * params.mu_s / params.sigma_a;
    let lo0 = -1.0 + 1e-6;
    let hi0 = ac;
    let f = |a2: f64| invariant_m(params, alpha1, a2);
    let f_lo = f(lo0)?;
    let f_hi = f(hi0)?;
    if !(f_lo < 0.0 && f_hi >= 0.0) {
        return Ok(None);
    }
    let (mut lo, mut hi) = (lo0, hi0);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Traces the M = 0 curve over an alpha1 range: one (alpha1, alpha2) vertex
/// per sample with a sign change; samples without one are omitted. Every
/// alpha1 in the range must have a positive margin.
pub fn trace_boundary_m0(params: &GlobalParams, range: &AxisRange) -> Result<Vec<[f64; 2]>> {
    let mut out = Vec::with_capacity(range.steps);
    for k in 0..range.steps {
        let a1 = range.value(k);
        if let Some(a2) = m_zero_alpha2(params, a1)? {
            out.push([a1, a2]);
        }
    }
    Ok(out)
}

/// Both wings of the M = 0 curve across the sweep window, ordered to pass
/// through the triple-point region once.
fn m0_boundary(spec: &SweepSpec) -> Vec<[f64; 2]> {
    let params = &spec.params;
    if margin_zero_alpha(params).is_none() {
        return vec![];
    }
    let mut out: Vec<[f64; 2]> = Vec::new();
    // wing with alpha2 dominant (above the diagonal), top down
    let r2 = &spec.alpha_ranges[1];
    for k in (0..r2.steps).rev() {
        let a2 = r2.value(k);
        if params.margin(a2) > 0.0 {
            if let Ok(Some(a1)) = m_zero_alpha2(params, a2) {
                out.push([a1, a2]);
            }
        }
    }
    // wing with alpha1 dominant (below the diagonal), left to right
    let r1 = &spec.alpha_ranges[0];
    for k in 0..r1.steps {
        let a1 = r1.value(k);
        if params.margin(a1) > 0.0 {
            if let Ok(Some(a2)) = m_zero_alpha2(params, a1) {
                out.push([a1, a2]);
            }
        }
    }
    out
}
