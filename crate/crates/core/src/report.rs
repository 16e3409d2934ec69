//! CSV serialization of logs and direct SVG plotting, no plotting crates.

use crate::sim::SimLog;
use crate::tune::TraceEntry;
use std::fmt::Write;

/// Frozen column contract of the time-series CSV.
pub const CSV_HEADER: &str = "t,phi,phi_dot,theta,theta_dot,psi,psi_dot,x,x_dot,y,y_dot,z,z_dot,\
phi_d,theta_d,psi_d,x_d,y_d,z_d,U1,U2,U3,U4,S_phi,S_theta,S_psi,S_x,S_y,S_z,\
e_phi,e_theta,e_psi,e_x,e_y,e_z";

/// Serializes a log to CSV with the frozen header. Floats are written in
/// their shortest round-trip form, so identical runs give identical bytes.
pub fn log_to_csv(log: &SimLog) -> String {
    let mut out = String::with_capacity(64 * log.rows.len() + CSV_HEADER.len() + 1);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &log.rows {
        write!(out, "{}", row.t).unwrap();
        for v in row.state.0 {
            write!(out, ",{v}").unwrap();
        }
        for v in row.refs {
            write!(out, ",{v}").unwrap();
        }
        for v in [row.u.u1, row.u.u2, row.u.u3, row.u.u4] {
            write!(out, ",{v}").unwrap();
        }
        for v in row.surfaces {
            write!(out, ",{v}").unwrap();
        }
        for v in row.errors {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Tuner trace CSV: one row per objective evaluation.
pub fn trace_to_csv(trace: &[TraceEntry], names: &[&str]) -> String {
    let mut out = String::new();
    out.push_str("eval,value,best_so_far");
    for n in names {
        write!(out, ",{n}").unwrap();
    }
    out.push('\n');
    for e in trace {
        write!(out, "{},{},{}", e.index, e.value, e.best_so_far).unwrap();
        for v in &e.point {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

const PLOT_W: f64 = 900.0;
const MARGIN: f64 = 50.0;
const OBTAINED: &str = "#1f77b4";
const DESIRED: &str = "#d62728";
const ERROR: &str = "#555555";

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    tmin: f64,
    tmax: f64,
    vmin: f64,
    vmax: f64,
}

impl Frame {
    fn fit(x0: f64, y0: f64, w: f64, h: f64, t: &[f64], series: &[&[f64]]) -> Frame {
        let tmin = t.first().copied().unwrap_or(0.0);
        let tmax = t.last().copied().unwrap_or(1.0).max(tmin + 1e-9);
        let mut vmin = f64::INFINITY;
        let mut vmax = f64::NEG_INFINITY;
        for s in series {
            for &v in *s {
                vmin = vmin.min(v);
                vmax = vmax.max(v);
            }
        }
        if !vmin.is_finite() || !vmax.is_finite() {
            vmin = 0.0;
            vmax = 1.0;
        }
        if vmax - vmin < 1e-9 {
            vmin -= 0.5;
            vmax += 0.5;
        }
        let pad = 0.05 * (vmax - vmin);
        Frame {
            x0,
            y0,
            w,
            h,
            tmin,
            tmax,
            vmin: vmin - pad,
            vmax: vmax + pad,
        }
    }

    fn px(&self, t: f64) -> f64 {
        self.x0 + (t - self.tmin) / (self.tmax - self.tmin) * self.w
    }

    fn py(&self, v: f64) -> f64 {
        self.y0 + self.h - (v - self.vmin) / (self.vmax - self.vmin) * self.h
    }

    fn polyline(&self, t: &[f64], v: &[f64], color: &str, dashed: bool) -> String {
        let mut d = String::new();
        for (i, (&ti, &vi)) in t.iter().zip(v).enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            write!(d, "{}{:.2} {:.2}", cmd, self.px(ti), self.py(vi)).unwrap();
        }
        let dash = if dashed {
            " stroke-dasharray=\"6 4\""
        } else {
            ""
        };
        format!("<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>\n")
    }

    fn axes(&self, v_label: &str) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#999\"/>",
            self.x0, self.y0, self.w, self.h
        )
        .unwrap();
        if self.vmin < 0.0 && self.vmax > 0.0 {
            let y = self.py(0.0);
            writeln!(
                s,
                "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#ddd\"/>",
                self.x0,
                self.x0 + self.w
            )
            .unwrap();
        }
        writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" fill=\"#333\">{}</text>",
            self.x0 + 4.0,
            self.y0 + 13.0,
            v_label
        )
        .unwrap();
        writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" fill=\"#666\" text-anchor=\"end\">{:.3}</text>",
            self.x0 - 4.0,
            self.py(self.vmax) + 10.0,
            self.vmax
        )
        .unwrap();
        writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" fill=\"#666\" text-anchor=\"end\">{:.3}</text>",
            self.x0 - 4.0,
            self.py(self.vmin),
            self.vmin
        )
        .unwrap();
        s
    }
}

/// Keeps SVG path sizes sane on long runs.
fn decimate(log: &SimLog) -> Vec<usize> {
    let step = (log.rows.len() / 2000).max(1);
    let mut idx: Vec<usize> = (0..log.rows.len()).step_by(step).collect();
    if idx.last() != Some(&(log.rows.len() - 1)) && !log.rows.is_empty() {
        idx.push(log.rows.len() - 1);
    }
    idx
}

/// Desired vs obtained trace for one channel plus the error below it.
/// `channel` is the loop index (phi, theta, psi, x, y, z).
pub fn tracking_plot(log: &SimLog, channel: usize, label: &str, unit: &str) -> String {
    let idx = decimate(log);
    let t: Vec<f64> = idx.iter().map(|&i| log.rows[i].t).collect();
    let obtained: Vec<f64> = idx
        .iter()
        .map(|&i| log.rows[i].state.0[2 * channel])
        .collect();
    let desired: Vec<f64> = idx.iter().map(|&i| log.rows[i].refs[channel]).collect();
    let error: Vec<f64> = idx.iter().map(|&i| log.rows[i].errors[channel]).collect();

    let h = 560.0;
    let top = Frame::fit(
        MARGIN,
        40.0,
        PLOT_W - 2.0 * MARGIN,
        300.0,
        &t,
        &[&desired, &obtained],
    );
    let bottom = Frame::fit(MARGIN, 380.0, PLOT_W - 2.0 * MARGIN, 150.0, &t, &[&error]);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PLOT_W}\" height=\"{h}\" \
viewBox=\"0 0 {PLOT_W} {h}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    writeln!(
        svg,
        "<text x=\"{:.0}\" y=\"24\" font-size=\"15\" fill=\"#111\">{label} tracking [{unit}]</text>",
        MARGIN
    )
    .unwrap();
    writeln!(
        svg,
        "<text x=\"{:.0}\" y=\"24\" font-size=\"11\" text-anchor=\"end\">\
<tspan fill=\"{DESIRED}\">desired</tspan>  <tspan fill=\"{OBTAINED}\">obtained</tspan></text>",
        PLOT_W - MARGIN
    )
    .unwrap();
    svg.push_str(&top.axes(label));
    svg.push_str(&top.polyline(&t, &desired, DESIRED, true));
    svg.push_str(&top.polyline(&t, &obtained, OBTAINED, false));
    svg.push_str(&bottom.axes("error"));
    svg.push_str(&bottom.polyline(&t, &error, ERROR, false));
    write!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" fill=\"#333\">t [s]</text>\n</svg>\n",
        PLOT_W / 2.0 - 10.0,
        552.0
    )
    .unwrap();
    svg
}

/// Isometric projection of the desired and obtained (x, y, z) paths.
pub fn trajectory_plot_3d(log: &SimLog) -> String {
    let idx = decimate(log);
    let project = |x: f64, y: f64, z: f64| {
        let c30 = 0.8660254037844387;
        let s30 = 0.5;
        ((x - y) * c30, z + (x + y) * s30)
    };
    let desired: Vec<(f64, f64)> = idx
        .iter()
        .map(|&i| {
            let r = &log.rows[i];
            project(r.refs[3], r.refs[4], r.refs[5])
        })
        .collect();
    let obtained: Vec<(f64, f64)> = idx
        .iter()
        .map(|&i| {
            let r = &log.rows[i];
            project(r.state.x(), r.state.y(), r.state.z())
        })
        .collect();

    let (mut umin, mut umax, mut vmin, mut vmax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(u, v) in desired.iter().chain(obtained.iter()) {
        umin = umin.min(u);
        umax = umax.max(u);
        vmin = vmin.min(v);
        vmax = vmax.max(v);
    }
    let span_u = (umax - umin).max(1e-9);
    let span_v = (vmax - vmin).max(1e-9);
    let (w, h) = (720.0, 720.0);
    let scale = ((w - 2.0 * MARGIN) / span_u).min((h - 2.0 * MARGIN) / span_v);
    let map = |(u, v): (f64, f64)| (MARGIN + (u - umin) * scale, h - MARGIN - (v - vmin) * scale);
    let path = |pts: &[(f64, f64)], color: &str, dashed: bool| {
        let mut d = String::new();
        for (i, &p) in pts.iter().enumerate() {
            let (px, py) = map(p);
            let cmd = if i == 0 { 'M' } else { 'L' };
            write!(d, "{cmd}{px:.2} {py:.2}").unwrap();
        }
        let dash = if dashed {
            " stroke-dasharray=\"6 4\""
        } else {
            ""
        };
        format!("<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>\n")
    };

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
<text x=\"{MARGIN}\" y=\"24\" font-size=\"15\" fill=\"#111\">trajectory, isometric projection [m]</text>\n\
<text x=\"{:.0}\" y=\"24\" font-size=\"11\" text-anchor=\"end\">\
<tspan fill=\"{DESIRED}\">desired</tspan>  <tspan fill=\"{OBTAINED}\">obtained</tspan></text>\n",
        w - MARGIN
    );
    svg.push_str(&path(&desired, DESIRED, true));
    svg.push_str(&path(&obtained, OBTAINED, false));
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::sim;

    fn short_log() -> SimLog {
        let rc = presets::fig3_attitude();
        let mut cfg = rc.sim_config().unwrap();
        cfg.t_end = 0.5;
        sim::run(&cfg, &rc.params, &rc.gain_set().unwrap(), &rc.trajectory).unwrap()
    }

    #[test]
    fn csv_has_frozen_header_and_full_rows() {
        let log = short_log();
        let csv = log_to_csv(&log);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let first = lines.next().unwrap();
        assert_eq!(first.split(',').count(), 35);
        assert_eq!(csv.lines().count(), log.rows.len() + 1);
    }

    #[test]
    fn csv_round_trips_floats() {
        let log = short_log();
        let csv = log_to_csv(&log);
        let line = csv.lines().nth(5).unwrap();
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields[0], log.rows[4].t);
        assert_eq!(fields[1], log.rows[4].state.phi());
    }

    #[test]
    fn svg_documents_are_well_formed_enough() {
        let log = short_log();
        for ch in 0..6 {
            let svg = tracking_plot(&log, ch, "phi", "rad");
            assert!(svg.starts_with("<svg"));
            assert!(svg.trim_end().ends_with("</svg>"));
            assert!(svg.matches("<path").count() >= 3);
        }
        let svg3d = trajectory_plot_3d(&log);
        assert!(svg3d.contains("isometric"));
    }
}
