//! Run logs: a fixed column schema, CSV tables and plot series.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::constraints::ConstraintSettings;
use crate::dynamics::HandObjectModel;
use crate::error::{GraspError, Result};
use crate::zcbf::BarrierFamily;

/// Tolerance below zero at which a barrier value counts as violated.
pub const VIOLATION_TOL: f64 = 1e-6;

const ROLLING_SIDES: [&str; 4] = ["a_max", "a_min", "b_max", "b_min"];

#[derive(Debug, Clone, PartialEq)]
pub struct LogSchema {
    pub columns: Vec<String>,
}

impl LogSchema {
    pub fn new(model: &HandObjectModel<f64>, settings: &ConstraintSettings<f64>) -> Self {
        let m = model.dof();
        let n = model.contact_count();
        let mut c: Vec<String> = vec!["t".into()];
        c.extend((0..m).map(|j| format!("q{j}")));
        c.extend((0..m).map(|j| format!("qd{j}")));
        c.extend(["obj_x", "obj_y", "obj_z", "obj_roll", "obj_pitch", "obj_yaw"].map(String::from));
        c.extend(["obj_vx", "obj_vy", "obj_vz", "obj_wx", "obj_wy", "obj_wz"].map(String::from));
        for i in 0..n {
            for s in ["xi_f_a", "xi_f_b", "xi_o_a", "xi_o_b", "psi", "f_t1", "f_t2", "f_n", "beta"] {
                c.push(format!("c{i}_{s}"));
            }
        }
        let e = settings.enabled;
        if e.slip {
            for i in 0..n {
                for k in 0..settings.pyramid.faces {
                    c.push(format!("slip_c{i}_k{k}_h"));
                }
            }
        }
        let barrier = |c: &mut Vec<String>, stem: String| {
            for s in ["h", "B", "cond"] {
                c.push(format!("{stem}_{s}"));
            }
        };
        if e.joint_limits {
            for side in ["max", "min"] {
                for j in 0..m {
                    barrier(&mut c, format!("joint_q{j}_{side}"));
                }
            }
        }
        if e.rolling {
            for i in 0..n {
                for side in ROLLING_SIDES {
                    barrier(&mut c, format!("rolling_c{i}_{side}"));
                }
            }
        }
        if e.actuator {
            for side in ["max", "min"] {
                for j in 0..m {
                    c.push(format!("act_u{j}_{side}_margin"));
                }
            }
        }
        c.extend((0..m).map(|j| format!("u_nom{j}")));
        c.extend((0..m).map(|j| format!("u{j}")));
        c.extend(
            [
                "qp_solved",
                "qp_iterations",
                "qp_active",
                "kkt_primal",
                "kkt_stationarity",
                "kkt_min_multiplier",
                "kkt_complementarity",
                "filter_deviation",
                "grasp_residual",
                "pre_projection_residual",
                "position_correction",
                "velocity_correction",
            ]
            .map(String::from),
        );
        LogSchema { columns: c }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub mode: String,
    pub termination: String,
    pub reason: String,
}

/// Per-family extremes over a log.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySummary {
    pub family: String,
    pub min_value: f64,
    pub first_violation: Option<f64>,
}

impl RunLog {
    pub fn new(schema: LogSchema, mode: &str) -> Self {
        RunLog { columns: schema.columns, rows: Vec::new(), mode: mode.into(), termination: String::new(), reason: String::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn series(&self, name: &str) -> Option<Vec<f64>> {
        self.column(name).map(|j| self.rows.iter().map(|r| r[j]).collect())
    }

    /// Column indices whose value must stay non-negative for `family`.
    pub fn family_columns(&self, family: BarrierFamily) -> Vec<usize> {
        let (prefix, suffix) = match family {
            BarrierFamily::Slip => ("slip_", "_h"),
            BarrierFamily::JointLimit => ("joint_", "_h"),
            BarrierFamily::Rolling => ("rolling_", "_h"),
            BarrierFamily::Actuator => ("act_", "_margin"),
        };
        (0..self.columns.len()).filter(|&j| self.columns[j].starts_with(prefix) && self.columns[j].ends_with(suffix)).collect()
    }

    pub fn family_summary(&self, family: BarrierFamily) -> FamilySummary {
        let cols = self.family_columns(family);
        let mut min_value = f64::INFINITY;
        let mut first_violation = None;
        for r in &self.rows {
            for &j in &cols {
                min_value = min_value.min(r[j]);
                if first_violation.is_none() && r[j] < -VIOLATION_TOL {
                    first_violation = Some(r[0]);
                }
            }
        }
        FamilySummary { family: family.name().into(), min_value, first_violation }
    }

    /// `μ - max β` with the time β first exceeded `μ`.
    pub fn friction_summary(&self, mu: f64) -> FamilySummary {
        let cols: Vec<usize> = (0..self.columns.len()).filter(|&j| self.columns[j].ends_with("_beta")).collect();
        let mut min_value = f64::INFINITY;
        let mut first_violation = None;
        for r in &self.rows {
            for &j in &cols {
                min_value = min_value.min(mu - r[j]);
                if first_violation.is_none() && r[j] > mu {
                    first_violation = Some(r[0]);
                }
            }
        }
        FamilySummary { family: "friction".into(), min_value, first_violation }
    }

    /// Comma-separated table with a `#` metadata line, a header row and
    /// every value printed with 17 significant digits.
    pub fn write_table(&self, path: &Path) -> Result<()> {
        let mut text = String::new();
        writeln!(text, "# mode={} termination={} reason={}", self.mode, self.termination, self.reason.replace('\n', " ")).unwrap();
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| format!("{v:.16e}"))).map_err(csv_err)?;
        }
        text.push_str(&String::from_utf8(w.into_inner().map_err(|e| GraspError::Io(e.to_string()))?).expect("ascii"));
        fs::write(path, text)?;
        Ok(())
    }

    pub fn read_table(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let (meta, body) = match text.strip_prefix("# ") {
            Some(rest) => rest.split_once('\n').unwrap_or((rest, "")),
            None => ("", text.as_str()),
        };
        let field = |key: &str| -> String {
            let tag = format!("{key}=");
            meta.split_once(&tag).map(|(_, v)| if key == "reason" { v.to_string() } else { v.split(' ').next().unwrap_or("").to_string() }).unwrap_or_default()
        };
        let mut rdr = csv::ReaderBuilder::new().from_reader(body.as_bytes());
        let columns: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            let row = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| GraspError::Io(format!("{}: bad number {s:?}: {e}", path.display()))))
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != columns.len() {
                return Err(GraspError::Io(format!("{}: ragged row", path.display())));
            }
            rows.push(row);
        }
        Ok(RunLog { columns, rows, mode: field("mode"), termination: field("termination"), reason: field("reason") })
    }

    /// Per-panel series: contact coordinates with workspace bounds, joint
    /// angles with limits and required friction with the `μ` line.
    pub fn write_plotdata(&self, dir: &Path, settings: &ConstraintSettings<f64>, mu: f64) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let t = self.series("t").unwrap_or_default();
        let w = settings.workspace;
        let mut files = Vec::new();
        let mut write = |name: &str, header: Vec<String>, cols: Vec<Box<dyn Fn(usize) -> f64 + '_>>| -> Result<()> {
            let mut wr = csv::WriterBuilder::new().from_writer(Vec::new());
            wr.write_record(&header).map_err(csv_err)?;
            for k in 0..t.len() {
                wr.write_record(cols.iter().map(|c| format!("{:.16e}", c(k)))).map_err(csv_err)?;
            }
            let p = dir.join(name);
            fs::write(&p, wr.into_inner().map_err(|e| GraspError::Io(e.to_string()))?)?;
            files.push(p);
            Ok(())
        };

        let n = (0..).take_while(|i| self.column(&format!("c{i}_xi_f_a")).is_some()).count();
        let mut header = vec!["t".to_string()];
        let mut cols: Vec<Box<dyn Fn(usize) -> f64 + '_>> = vec![Box::new(|k| t[k])];
        for i in 0..n {
            for s in ["a", "b"] {
                let j = self.column(&format!("c{i}_xi_f_{s}")).unwrap();
                header.push(format!("c{i}_{s}"));
                cols.push(Box::new(move |k| self.rows[k][j]));
            }
        }
        for (name, v) in [("a_min", w.a_min), ("a_max", w.a_max), ("b_min", w.b_min), ("b_max", w.b_max)] {
            header.push(name.into());
            cols.push(Box::new(move |_| v));
        }
        write("contacts.csv", header, cols)?;

        let m = settings.limits.q_max.len();
        let mut header = vec!["t".to_string()];
        let mut cols: Vec<Box<dyn Fn(usize) -> f64 + '_>> = vec![Box::new(|k| t[k])];
        for j in 0..m {
            let c = self.column(&format!("q{j}")).unwrap();
            let (lo, hi) = (settings.limits.q_min[j], settings.limits.q_max[j]);
            header.extend([format!("q{j}"), format!("q{j}_min"), format!("q{j}_max")]);
            cols.push(Box::new(move |k| self.rows[k][c]));
            cols.push(Box::new(move |_| lo));
            cols.push(Box::new(move |_| hi));
        }
        write("joints.csv", header, cols)?;

        let mut header = vec!["t".to_string()];
        let mut cols: Vec<Box<dyn Fn(usize) -> f64 + '_>> = vec![Box::new(|k| t[k])];
        for i in 0..n {
            let c = self.column(&format!("c{i}_beta")).unwrap();
            header.push(format!("beta{i}"));
            cols.push(Box::new(move |k| self.rows[k][c]));
        }
        header.push("mu".into());
        cols.push(Box::new(move |_| mu));
        write("friction.csv", header, cols)?;
        Ok(files)
    }
}

fn csv_err(e: csv::Error) -> GraspError {
    GraspError::Io(e.to_string())
}

/// Side-by-side comparison of two runs with the same schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub termination: (String, String),
    pub end_time: (f64, f64),
    pub families: Vec<(FamilySummary, FamilySummary)>,
    /// Largest absolute difference over the common prefix of rows.
    pub max_difference: f64,
}

pub fn compare(a: &RunLog, b: &RunLog, mu: f64) -> Result<Comparison> {
    if a.columns != b.columns {
        let first = a.columns.iter().zip(&b.columns).position(|(x, y)| x != y).unwrap_or(a.columns.len().min(b.columns.len()));
        return Err(GraspError::SchemaMismatch(format!(
            "{} vs {} columns, first difference at column {first}",
            a.columns.len(),
            b.columns.len()
        )));
    }
    let mut families: Vec<_> = BarrierFamily::ALL.iter().map(|&f| (a.family_summary(f), b.family_summary(f))).collect();
    families.push((a.friction_summary(mu), b.friction_summary(mu)));
    let max_difference = a
        .rows
        .iter()
        .zip(&b.rows)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| if p == q { 0.0 } else { (p - q).abs() }))
        .fold(0.0, f64::max);
    let end = |l: &RunLog| l.rows.last().map_or(0.0, |r| r[0]);
    Ok(Comparison {
        termination: (a.termination.clone(), b.termination.clone()),
        end_time: (end(a), end(b)),
        families,
        max_difference,
    })
}

impl std::fmt::Display for Comparison {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |t| format!("{t:.3}"));
        writeln!(f, "{:<12} {:>24} {:>24}", "", "a", "b")?;
        writeln!(f, "{:<12} {:>24} {:>24}", "termination", self.termination.0, self.termination.1)?;
        writeln!(f, "{:<12} {:>24.3} {:>24.3}", "end time", self.end_time.0, self.end_time.1)?;
        for (x, y) in &self.families {
            writeln!(f, "{:<12} {:>14.6e} @ {:>7} {:>14.6e} @ {:>7}", x.family, x.min_value, opt(x.first_violation), y.min_value, opt(y.first_violation))?;
        }
        write!(f, "max difference {:.6e}", self.max_difference)
    }
}
