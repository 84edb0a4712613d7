//! Reference integrators for unit tests. The model right-hand side is written
//! out longhand here so these stay independent of the production code path.

use crate::model::GlobalParams;

/// Fixed-step RK4 for a scalar non-autonomous ODE dx/dt = f(t, x).
pub(crate) fn rk4_scalar(
    f: impl Fn(f64, f64) -> f64,
    t0: f64,
    x0: f64,
    h: f64,
    steps: usize,
) -> f64 {
    let mut t = t0;
    let mut x = x0;
    for _ in 0..steps {
        let k1 = f(t, x);
        let k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
        let k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
        let k4 = f(t + h, x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    x
}

fn rhs(params: &GlobalParams, alphas: &[f64], state: &[f64]) -> Vec<f64> {
    let n = alphas.len();
    let (x, y) = state.split_at(n);
    let mut d = vec![0.0; 2 * n];
    for i in 0..n {
        let gamma = if n == 1 {
            0.0
        } else {
            y.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &v)| v)
                .sum::<f64>()
                / (n as f64 - 1.0)
        };
        d[i] = (params.sigma_a * alphas[i] + params.sigma_s * (gamma - params.mu_s))
            * params.sigma_c
            * (gamma + params.mu_c)
            * (1.0 - x[i])
            * (1.0 + x[i]);
        d[n + i] = -params.r * y[i];
    }
    d
}

/// Fixed-step RK4 on the full threshold-free system; y decays numerically here
/// rather than exactly.
pub(crate) fn rk4_model(
    params: &GlobalParams,
    alphas: &[f64],
    x0: &[f64],
    y0: &[f64],
    h: f64,
    steps: usize,
) -> (Vec<f64>, Vec<f64>) {
    let n = x0.len();
    let mut state: Vec<f64> = x0.iter().chain(y0.iter()).copied().collect();
    for _ in 0..steps {
        let k1 = rhs(params, alphas, &state);
        let k2 = rhs(params, alphas, &axpy(&state, 0.5 * h, &k1));
        let k3 = rhs(params, alphas, &axpy(&state, 0.5 * h, &k2));
        let k4 = rhs(params, alphas, &axpy(&state, h, &k3));
        for i in 0..2 * n {
            state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    (state[..n].to_vec(), state[n..].to_vec())
}

fn axpy(base: &[f64], scale: f64, dir: &[f64]) -> Vec<f64> {
    base.iter().zip(dir).map(|(b, d)| b + scale * d).collect()
}
