use std::fmt::Write as _;
use std::io;

/// Per-iteration quantities. `j`, `l_eps` and the gradient norms are taken
/// at the iterate `t`; `mu_t`/`nu_t` are the steps used to leave it (zero on
/// the final record).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: usize,
    pub j: f64,
    pub l_eps: f64,
    pub grad_z_norm: f64,
    pub grad_v_norm: f64,
    pub mu_t: f64,
    pub nu_t: f64,
    pub wall_ns: u64,
}

impl TraceRecord {
    pub fn grad_norm_sq(&self) -> f64 {
        self.grad_z_norm * self.grad_z_norm + self.grad_v_norm * self.grad_v_norm
    }
}

pub const CSV_HEADER: &str = "t,J,L_eps,grad_z_norm,grad_v_norm,mu_t,nu_t,wall_ns";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    records: Vec<TraceRecord>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: TraceRecord) {
        self.records.push(record);
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.j).collect()
    }

    /// `min_{s <= t} ||grad J(z^s, v^s)||^2` for every `t`.
    pub fn running_min_grad_sq(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.records
            .iter()
            .map(|r| {
                best = best.min(r.grad_norm_sq());
                best
            })
            .collect()
    }

    /// `min_{t < count} ||grad J||^2`.
    pub fn min_grad_sq(&self, count: usize) -> f64 {
        self.records
            .iter()
            .take(count)
            .map(TraceRecord::grad_norm_sq)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(160 * (self.records.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                r.t, r.j, r.l_eps, r.grad_z_norm, r.grad_v_norm, r.mu_t, r.nu_t, r.wall_ns
            )
            .expect("writing to a String cannot fail");
        }
        out
    }

    pub fn write_csv(&self, mut writer: impl io::Write) -> io::Result<()> {
        writer.write_all(self.to_csv().as_bytes())
    }

    /// Parses the CSV produced by [`Trace::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        match lines.next() {
            Some(header) if header.trim() == CSV_HEADER => {}
            other => return Err(format!("unexpected trace header {other:?}")),
        }
        let mut trace = Trace::new();
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 8 {
                return Err(format!("line {}: expected 8 columns, got {}", n + 2, cols.len()));
            }
            let float = |i: usize| -> Result<f64, String> {
                cols[i].parse().map_err(|e| format!("line {}, column {}: {e}", n + 2, i + 1))
            };
            trace.push(TraceRecord {
                t: cols[0].parse().map_err(|e| format!("line {}: {e}", n + 2))?,
                j: float(1)?,
                l_eps: float(2)?,
                grad_z_norm: float(3)?,
                grad_v_norm: float(4)?,
                mu_t: float(5)?,
                nu_t: float(6)?,
                wall_ns: cols[7].parse().map_err(|e| format!("line {}: {e}", n + 2))?,
            });
        }
        Ok(trace)
    }
}
