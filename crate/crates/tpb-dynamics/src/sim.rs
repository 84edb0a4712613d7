//! Event-detecting integrator for the full n-individual hybrid system.
//!
//! Between events the intention vector is advanced with a classical RK4
//! stepper under step-halving error control, while the nudges decay by their
//! exact exponential. Whenever an intention crosses the threshold inside a
//! step, the crossing time is bracketed by bisection to the event tolerance,
//! everyone at or above the threshold resets in the same instant, and
//! integration resumes. Trajectories are deterministic given identical inputs.

use serde::{Deserialize, Serialize};

use crate::analytic::{Classification, Evidence, Regime};
use crate::error::{Error, Result};
use crate::model::{self, GlobalParams, IndividualConfig, SystemState};

/// Relative tolerance of the per-step halving error control.
const STEP_RTOL: f64 = 1e-9;

/// Growth/shrink clamps for the adaptive step.
const STEP_GROW_MAX: f64 = 5.0;
const STEP_SHRINK_MIN: f64 = 0.2;

/// A non-actor whose trailing per-period net change is positive but at most
/// this is reported as Undetermined rather than guessed at.
pub const NET_CHANGE_TOL: f64 = 1e-6;

/// One threshold crossing. Individuals are indexed from 0 here; the file
/// writers number them from 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionEvent {
    pub individual: usize,
    pub t: f64,
}

/// Simulation output: dense samples, the event log, and a provenance echo.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// States on the sample grid (strictly increasing in t). Empty when
    /// sampling was turned off.
    pub samples: Vec<SystemState>,
    /// Action events in causal order.
    pub events: Vec<ActionEvent>,
    /// Post-reset state at each event, parallel to `events`.
    pub event_states: Vec<SystemState>,
    pub t_end: f64,
    pub params: GlobalParams,
    pub alphas: Vec<f64>,
}

impl Trajectory {
    /// Events of one individual, in order.
    pub fn events_of(&self, individual: usize) -> impl Iterator<Item = &ActionEvent> {
        self.events.iter().filter(move |e| e.individual == individual)
    }

    pub fn event_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.alphas.len()];
        for e in &self.events {
            counts[e.individual] += 1;
        }
        counts
    }
}

/// Integration window and tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub t_end: f64,
    /// Upper bound on the integrator step.
    pub dt_max: f64,
    /// Width to which threshold-crossing times are bracketed.
    pub event_tol: f64,
    /// Output resolution of the sample grid.
    pub sample_every: f64,
    /// Classification horizon in units of the shortest unaided period.
    pub horizon_periods: u32,
}

pub const DEFAULT_EVENT_TOL: f64 = 1e-10;
pub const DEFAULT_HORIZON_PERIODS: u32 = 40;

impl SimConfig {
    /// Derives the window from the population: `dt_max` is a fiftieth of the
    /// shortest unaided period, `t_end` covers `horizon_periods` of it and is
    /// stretched, if needed, past the longest unaided period so that every
    /// individual with positive margin provably gets to act. With no positive
    /// margin nothing ever fires and a short decay-scale window is used.
    pub fn derive(
        params: &GlobalParams,
        alphas: &[f64],
        horizon_periods: u32,
        event_tol: f64,
    ) -> Result<Self> {
        let mut t_min = f64::INFINITY;
        let mut t_max: f64 = 0.0;
        for &alpha in alphas {
            if params.rate(alpha) > 0.0 {
                let t = params.unaided_period(alpha)?;
                t_min = t_min.min(t);
                t_max = t_max.max(t);
            }
        }
        let (unit, t_end) = if t_min.is_finite() {
            (
                t_min,
                (horizon_periods.max(1) as f64 * t_min).max(1.05 * t_max),
            )
        } else {
            let unit = if params.r > 0.0 { 1.0 / params.r } else { 1.0 };
            (unit, 10.0 * unit)
        };
        let dt_max = unit / 50.0;
        let cfg = Self {
            t_end,
            dt_max,
            event_tol: event_tol.min(dt_max / 10.0),
            sample_every: dt_max,
            horizon_periods,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: &str| Err(Error::InvalidSimConfig {
            reason: reason.to_string(),
        });
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return fail("t_end must be positive and finite");
        }
        if !(self.dt_max.is_finite() && self.dt_max > 0.0) {
            return fail("dt_max must be positive and finite");
        }
        if !(self.event_tol.is_finite() && self.event_tol > 0.0) {
            return fail("event_tol must be positive and finite");
        }
        if !(self.sample_every.is_finite() && self.sample_every > 0.0) {
            return fail("sample_every must be positive and finite");
        }
        if !(self.event_tol < self.dt_max) {
            return fail("event_tol must be smaller than dt_max");
        }
        if !(self.dt_max <= self.sample_every) {
            return fail("dt_max must not exceed sample_every");
        }
        if self.horizon_periods == 0 {
            return fail("horizon_periods must be at least 1");
        }
        Ok(())
    }
}

/// Extra knobs beyond the public contract.
#[derive(Debug, Clone)]
pub struct SimOptions {
    /// Record the dense sample grid (events are always recorded).
    pub record_samples: bool,
    /// Individuals whose own threshold is ignored: they flow freely and never
    /// reset, while still receiving everyone else's nudges. Used to observe
    /// the threshold-free dynamics of one coordinate.
    pub threshold_exempt: Vec<usize>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            record_samples: true,
            threshold_exempt: Vec::new(),
        }
    }
}

/// Integrates the hybrid system with event detection and resets.
pub fn simulate(
    params: &GlobalParams,
    individuals: &[IndividualConfig],
    cfg: &SimConfig,
) -> Result<Trajectory> {
    simulate_opts(params, individuals, cfg, &SimOptions::default())
}

struct Stepper<'a> {
    params: &'a GlobalParams,
    alphas: &'a [f64],
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    xs: Vec<f64>,
    y_half: Vec<f64>,
    y_full: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(params: &'a GlobalParams, alphas: &'a [f64]) -> Self {
        let n = alphas.len();
        Self {
            params,
            alphas,
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            xs: vec![0.0; n],
            y_half: vec![0.0; n],
            y_full: vec![0.0; n],
        }
    }

    /// One RK4 step of size h for x, with y propagated exactly from its value
    /// at the step start. Writes x(t+h) into `out`.
    #[allow(clippy::needless_range_loop)] // stage loops index several slices in lockstep
    fn rk4(&mut self, x: &[f64], y: &[f64], h: f64, out: &mut [f64]) {
        let n = x.len();
        let decay_half = (-self.params.r * 0.5 * h).exp();
        let decay_full = (-self.params.r * h).exp();
        for i in 0..n {
            self.y_half[i] = y[i] * decay_half;
            self.y_full[i] = y[i] * decay_full;
        }
        model::dx_into(self.params, self.alphas, x, y, &mut self.k1);
        for i in 0..n {
            self.xs[i] = x[i] + 0.5 * h * self.k1[i];
        }
        model::dx_into(self.params, self.alphas, &self.xs, &self.y_half, &mut self.k2);
        for i in 0..n {
            self.xs[i] = x[i] + 0.5 * h * self.k2[i];
        }
        model::dx_into(self.params, self.alphas, &self.xs, &self.y_half, &mut self.k3);
        for i in 0..n {
            self.xs[i] = x[i] + h * self.k3[i];
        }
        model::dx_into(self.params, self.alphas, &self.xs, &self.y_full, &mut self.k4);
        for i in 0..n {
            out[i] = x[i]
                + h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }

    /// x after a sub-step of size s from (x, y), as a fresh vector.
    fn probe(&mut self, x: &[f64], y: &[f64], s: f64) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.rk4(x, y, s, &mut out);
        out
    }
}

pub fn simulate_opts(
    params: &GlobalParams,
    individuals: &[IndividualConfig],
    cfg: &SimConfig,
    opts: &SimOptions,
) -> Result<Trajectory> {
    params.validate()?;
    cfg.validate()?;
    if individuals.len() != params.n {
        return Err(Error::PopulationMismatch {
            expected: params.n,
            got: individuals.len(),
        });
    }
    for ind in individuals {
        ind.validate()?;
    }
    let n = params.n;
    let mut exempt = vec![false; n];
    for &i in &opts.threshold_exempt {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        exempt[i] = true;
    }

    let alphas: Vec<f64> = individuals.iter().map(|c| c.alpha).collect();
    let mut x: Vec<f64> = individuals.iter().map(|c| c.x0).collect();
    let mut y: Vec<f64> = individuals.iter().map(|c| c.y0).collect();
    let mut t = 0.0f64;

    let mut events: Vec<ActionEvent> = Vec::new();
    let mut event_states: Vec<SystemState> = Vec::new();
    let mut samples: Vec<SystemState> = Vec::new();
    let mut last_event_t: Vec<Option<f64>> = vec![None; n];

    let mut stepper = Stepper::new(params, &alphas);

    let record_event = |t_ev: f64,
                        actors: &[usize],
                        x: &mut [f64],
                        y: &mut [f64],
                        events: &mut Vec<ActionEvent>,
                        event_states: &mut Vec<SystemState>,
                        last_event_t: &mut [Option<f64>],
                        event_tol: f64|
     -> Result<()> {
        for &i in actors {
            if let Some(prev) = last_event_t[i] {
                if t_ev - prev <= event_tol {
                    return Err(Error::MinGapViolated {
                        individual: i,
                        t: t_ev,
                    });
                }
            }
        }
        let state = SystemState {
            t: t_ev,
            x: x.to_vec(),
            y: y.to_vec(),
        };
        let reset = model::apply_reset(&state, actors)?;
        x.copy_from_slice(&reset.x);
        y.copy_from_slice(&reset.y);
        for &i in actors {
            events.push(ActionEvent {
                individual: i,
                t: t_ev,
            });
            last_event_t[i] = Some(t_ev);
        }
        event_states.push(reset.clone());
        // keep one post-reset state per actor so the two stay parallel
        for _ in 1..actors.len() {
            event_states.push(reset.clone());
        }
        Ok(())
    };

    // Ingestion clamp: anything already at or above the threshold acts at t = 0.
    let initial_actors: Vec<usize> = (0..n)
        .filter(|&i| !exempt[i] && x[i] >= params.tau)
        .collect();
    if !initial_actors.is_empty() {
        record_event(
            0.0,
            &initial_actors,
            &mut x,
            &mut y,
            &mut events,
            &mut event_states,
            &mut last_event_t,
            cfg.event_tol,
        )?;
    }

    if opts.record_samples {
        samples.push(SystemState {
            t: 0.0,
            x: x.clone(),
            y: y.clone(),
        });
    }
    let mut next_sample: u64 = 1;

    let crossed = |x: &[f64]| -> bool {
        x.iter()
            .enumerate()
            .any(|(i, &v)| !exempt[i] && v >= params.tau)
    };

    let mut h_pref = cfg.dt_max;
    let mut x_full = vec![0.0; n];
    let mut x_mid = vec![0.0; n];
    let mut x_new = vec![0.0; n];

    while t < cfg.t_end {
        let sample_t = next_sample as f64 * cfg.sample_every;
        let t_stop = if opts.record_samples && sample_t < cfg.t_end {
            sample_t
        } else {
            cfg.t_end
        };
        let mut h = h_pref.min(cfg.dt_max).min(t_stop - t);

        // error-controlled attempt: full step vs two half steps
        let (h_acc, err_acc) = loop {
            stepper.rk4(&x, &y, h, &mut x_full);
            stepper.rk4(&x, &y, 0.5 * h, &mut x_mid);
            let y_mid: Vec<f64> = y.iter().map(|&v| v * (-params.r * 0.5 * h).exp()).collect();
            stepper.rk4(&x_mid, &y_mid, 0.5 * h, &mut x_new);
            let mut err = 0.0f64;
            for i in 0..n {
                let scale = x_new[i].abs().max(1.0);
                err = err.max((x_full[i] - x_new[i]).abs() / scale);
            }
            if err <= STEP_RTOL {
                break (h, err);
            }
            if h <= 1e-6 * cfg.dt_max {
                // the right-hand side is smooth; landing here means the state
                // went bad, not that the problem is stiff
                if x_new.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFiniteState { t });
                }
                break (h, err);
            }
            let shrink = if err.is_finite() {
                (0.9 * (STEP_RTOL / err).powf(0.2)).clamp(STEP_SHRINK_MIN, 0.9)
            } else {
                STEP_SHRINK_MIN
            };
            h *= shrink;
        };

        if x_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }

        // event scan at the midpoint and the endpoint of the accepted step
        let detect_offset = if crossed(&x_mid) {
            Some(0.5 * h_acc)
        } else if crossed(&x_new) {
            Some(h_acc)
        } else {
            None
        };

        if let Some(s_det) = detect_offset {
            // bracket the earliest crossing in (0, s_det]
            let mut lo = 0.0f64;
            let mut hi = s_det;
            while hi - lo > cfg.event_tol {
                let mid = 0.5 * (lo + hi);
                if crossed(&stepper.probe(&x, &y, mid)) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let x_ev = stepper.probe(&x, &y, hi);
            if x_ev.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState { t });
            }
            let decay = (-params.r * hi).exp();
            for yi in y.iter_mut() {
                *yi *= decay;
            }
            x.copy_from_slice(&x_ev);
            t += hi;
            let actors: Vec<usize> = (0..n)
                .filter(|&i| !exempt[i] && x[i] >= params.tau)
                .collect();
            if actors.is_empty() {
                // Knife-edge case: the half-step detection saw a crossing
                // within integrator error of the step end, but the probe path
                // lands just below the threshold at the bracket. Advance to
                // the bracket and let the following steps resolve it; if the
                // state starts the next step at or above the threshold, the
                // bisection collapses there immediately.
                h_pref = cfg.dt_max;
                continue;
            }
            record_event(
                t,
                &actors,
                &mut x,
                &mut y,
                &mut events,
                &mut event_states,
                &mut last_event_t,
                cfg.event_tol,
            )?;
            h_pref = cfg.dt_max;
            continue;
        }

        // plain acceptance
        let decay = (-params.r * h_acc).exp();
        for yi in y.iter_mut() {
            *yi *= decay;
        }
        x.copy_from_slice(&x_new);
        t += h_acc;
        let grow = if err_acc > 0.0 {
            (0.9 * (STEP_RTOL / err_acc).powf(0.2)).clamp(STEP_SHRINK_MIN, STEP_GROW_MAX)
        } else {
            STEP_GROW_MAX
        };
        h_pref = (h_acc * grow).min(cfg.dt_max);

        if opts.record_samples && t >= sample_t && sample_t < cfg.t_end {
            samples.push(SystemState {
                t,
                x: x.clone(),
                y: y.clone(),
            });
            next_sample += 1;
        }
    }

    if opts.record_samples {
        // final state, unless the loop landed exactly on a recorded sample
        if samples.last().map(|s| s.t) != Some(t) {
            samples.push(SystemState {
                t,
                x: x.clone(),
                y: y.clone(),
            });
        }
    }

    Ok(Trajectory {
        samples,
        events,
        event_states,
        t_end: cfg.t_end,
        params: *params,
        alphas,
    })
}

/// Classifies a finished run by who acted: everyone, some, or nobody.
///
/// One action implies infinitely many, so "has at least one event" is the
/// right notion of acting. A non-actor whose trailing per-period net change
/// is positive but within [`NET_CHANGE_TOL`] of zero sits too close to the
/// M = 0 boundary for this horizon and yields `Undetermined`.
pub fn empirical_classify(
    traj: &Trajectory,
    params: &GlobalParams,
    _cfg: &SimConfig,
) -> Classification {
    let n = traj.alphas.len();
    let margins: Vec<f64> = traj.alphas.iter().map(|&a| params.margin(a)).collect();
    let counts = traj.event_counts();
    let actors: Vec<usize> = (0..n).filter(|&i| counts[i] > 0).collect();
    let evidence = Evidence {
        invariant: None,
        margins,
    };
    if actors.is_empty() {
        return Classification {
            regime: Regime::NoAction,
            actors: vec![],
            evidence,
        };
    }
    if actors.len() == n {
        return Classification {
            regime: Regime::FullAction,
            actors: vec![],
            evidence,
        };
    }
    // trailing window: the last two actions of the busiest actor
    let mut busiest = actors[0];
    for &i in &actors[1..] {
        if counts[i] > counts[busiest] {
            busiest = i;
        }
    }
    if counts[busiest] >= 2 {
        let mut window: [Option<usize>; 2] = [None, None];
        for (idx, e) in traj.events.iter().enumerate() {
            if e.individual == busiest {
                window = [window[1], Some(idx)];
            }
        }
        if let [Some(a), Some(b)] = window {
            for j in (0..n).filter(|j| counts[*j] == 0) {
                let delta = traj.event_states[b].x[j] - traj.event_states[a].x[j];
                if delta > 0.0 && delta <= NET_CHANGE_TOL {
                    return Classification {
                        regime: Regime::Undetermined,
                        actors: vec![],
                        evidence,
                    };
                }
            }
        }
    }
    Classification {
        regime: Regime::PartialAction,
        actors,
        evidence,
    }
}
