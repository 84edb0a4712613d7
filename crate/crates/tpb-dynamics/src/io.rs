//! CSV and JSON writers for trajectories and sweep results.
//!
//! Every file starts with (or embeds) a provenance echo of the originating
//! config, and all numeric output round-trips exactly: CSV floats carry 17
//! significant digits, JSON uses the shortest round-tripping form. Reruns of
//! the same config therefore reproduce every file byte for byte. Individuals
//! are numbered from 1 in all output files.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::json;

use crate::analytic::Regime;
use crate::sim::Trajectory;
use crate::sweep::{SweepMode, SweepResult};

/// 17 significant digits: enough to reconstruct the exact f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn provenance_line<W: Write, T: Serialize>(w: &mut W, echo: &T) -> io::Result<()> {
    let payload = serde_json::to_string(echo).map_err(io::Error::other)?;
    writeln!(w, "# {payload}")
}

#[derive(Serialize)]
struct TrajectoryEcho<'a> {
    globals: &'a crate::model::GlobalParams,
    alphas: &'a [f64],
    t_end: f64,
}

fn trajectory_echo(traj: &Trajectory) -> TrajectoryEcho<'_> {
    TrajectoryEcho {
        globals: &traj.params,
        alphas: &traj.alphas,
        t_end: traj.t_end,
    }
}

/// Columns: t, x_1..x_n, y_1..y_n.
pub fn write_trajectory_csv<W: Write>(w: &mut W, traj: &Trajectory) -> io::Result<()> {
    provenance_line(w, &trajectory_echo(traj))?;
    let n = traj.alphas.len();
    let mut header = String::from("t");
    for i in 1..=n {
        header.push_str(&format!(",x_{i}"));
    }
    for i in 1..=n {
        header.push_str(&format!(",y_{i}"));
    }
    writeln!(w, "{header}")?;
    for s in &traj.samples {
        let mut line = fmt_f64(s.t);
        for v in s.x.iter().chain(s.y.iter()) {
            line.push(',');
            line.push_str(&fmt_f64(*v));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Columns: individual (1-based), t.
pub fn write_events_csv<W: Write>(w: &mut W, traj: &Trajectory) -> io::Result<()> {
    provenance_line(w, &trajectory_echo(traj))?;
    writeln!(w, "individual,t")?;
    for e in &traj.events {
        writeln!(w, "{},{}", e.individual + 1, fmt_f64(e.t))?;
    }
    Ok(())
}

/// The full JSON result envelope for a simulation run: resolved config echo,
/// events, per-individual counts, and the sampled trajectory.
pub fn trajectory_envelope(traj: &Trajectory, config_echo: &serde_json::Value) -> serde_json::Value {
    let events: Vec<serde_json::Value> = traj
        .events
        .iter()
        .map(|e| json!({"individual": e.individual + 1, "t": e.t}))
        .collect();
    let samples: Vec<serde_json::Value> = traj
        .samples
        .iter()
        .map(|s| json!({"t": s.t, "x": s.x, "y": s.y}))
        .collect();
    json!({
        "config": config_echo,
        "t_end": traj.t_end,
        "event_counts": traj.event_counts(),
        "events": events,
        "trajectory": samples,
    })
}

fn regime_label(r: Regime) -> &'static str {
    match r {
        Regime::NoAction => "NoAction",
        Regime::PartialAction => "PartialAction",
        Regime::FullAction => "FullAction",
        Regime::Undetermined => "Undetermined",
    }
}

/// Grid CSV. For n = 2: alpha1, alpha2, class, M, margin1, margin2, agreement.
/// For n = 3 (simulated sweeps): alpha_1..3, class, n_actors, margin_1..3,
/// agreement. Empty fields stand for "not computed"; failed cells carry the
/// class label `error`.
pub fn write_grid_csv<W: Write>(w: &mut W, result: &SweepResult) -> io::Result<()> {
    provenance_line(w, &result.spec)?;
    let n = result.spec.params.n;
    if n == 2 {
        writeln!(w, "alpha1,alpha2,class,M,margin1,margin2,agreement")?;
    } else {
        let mut header = String::new();
        for i in 1..=n {
            header.push_str(&format!("alpha{i},"));
        }
        header.push_str("class,n_actors,");
        for i in 1..=n {
            header.push_str(&format!("margin{i},"));
        }
        header.push_str("agreement");
        writeln!(w, "{header}")?;
    }
    for cell in &result.cells {
        let mut fields: Vec<String> = cell.alphas.iter().map(|&a| fmt_f64(a)).collect();
        let class = match cell.record() {
            Some(c) => regime_label(c.regime).to_string(),
            None => "error".to_string(),
        };
        fields.push(class);
        if n == 2 {
            fields.push(cell.invariant.map(fmt_f64).unwrap_or_default());
        } else {
            let n_actors = cell.record().map(|c| match c.regime {
                Regime::NoAction => 0,
                Regime::FullAction => n,
                Regime::PartialAction => c.actors.len(),
                Regime::Undetermined => usize::MAX,
            });
            fields.push(match n_actors {
                Some(usize::MAX) | None => String::new(),
                Some(k) => k.to_string(),
            });
        }
        for &m in &cell.margins {
            fields.push(fmt_f64(m));
        }
        fields.push(match cell.agreement {
            Some(true) => "true".to_string(),
            Some(false) => "false".to_string(),
            None => String::new(),
        });
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Boundary polyline CSV: alpha1, alpha2.
pub fn write_boundary_csv<W: Write, T: Serialize>(
    w: &mut W,
    points: &[[f64; 2]],
    echo: &T,
) -> io::Result<()> {
    provenance_line(w, echo)?;
    writeln!(w, "alpha1,alpha2")?;
    for p in points {
        writeln!(w, "{},{}", fmt_f64(p[0]), fmt_f64(p[1]))?;
    }
    Ok(())
}

/// Sweep summary JSON: counts, agreement, boundary sizes, spec echo.
pub fn sweep_summary_json(result: &SweepResult) -> serde_json::Value {
    json!({
        "spec": result.spec,
        "shape": result.shape,
        "mode": match result.spec.mode {
            SweepMode::Analytic => "analytic",
            SweepMode::Simulated => "simulated",
            SweepMode::Both => "both",
        },
        "summary": result.summary,
        "boundary_linear_points": result.boundary_linear.len(),
        "boundary_m0_points": result.boundary_m0.len(),
    })
}
