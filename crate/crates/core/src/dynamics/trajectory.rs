use std::io::Write;

use crate::linalg::norm2;
use crate::problem::Solution;

/// Recorded samples of a primal-dual trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Full states `z = (x, λ)`.
    pub states: Vec<Vec<f64>>,
    pub n_x: usize,
    pub reference: Option<Solution>,
    /// `‖z(t) − z*‖`, empty without a reference.
    pub error_norms: Vec<f64>,
}

impl Trajectory {
    pub fn new(
        times: Vec<f64>,
        states: Vec<Vec<f64>>,
        n_x: usize,
        reference: Option<Solution>,
    ) -> Self {
        debug_assert_eq!(times.len(), states.len());
        let error_norms = match &reference {
            Some(r) => {
                let zstar: Vec<f64> = r.x.iter().chain(&r.lambda).copied().collect();
                states
                    .iter()
                    .map(|z| norm2(&z.iter().zip(&zstar).map(|(a, b)| a - b).collect::<Vec<_>>()))
                    .collect()
            }
            None => Vec::new(),
        };
        Self {
            times,
            states,
            n_x,
            reference,
            error_norms,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_lambda(&self) -> usize {
        self.states.first().map_or(0, |z| z.len() - self.n_x)
    }

    pub fn x(&self, k: usize) -> &[f64] {
        &self.states[k][..self.n_x]
    }

    pub fn lambda(&self, k: usize) -> &[f64] {
        &self.states[k][self.n_x..]
    }

    pub fn final_x(&self) -> &[f64] {
        self.x(self.len() - 1)
    }

    pub fn final_lambda(&self) -> &[f64] {
        self.lambda(self.len() - 1)
    }

    /// Writes `t,x_1..x_n,lambda_1..lambda_m,err_norm` rows with 17
    /// significant digits. `err_norm` is `NaN` without a reference.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.n_x).map(|i| format!("x_{i}")));
        header.extend((1..=self.n_lambda()).map(|i| format!("lambda_{i}")));
        header.push("err_norm".into());
        w.write_record(&header)?;
        for (k, (t, z)) in self.times.iter().zip(&self.states).enumerate() {
            let mut row = Vec::with_capacity(z.len() + 2);
            row.push(format_sig17(*t));
            row.extend(z.iter().map(|v| format_sig17(*v)));
            row.push(
                self.error_norms
                    .get(k)
                    .map_or_else(|| "NaN".to_string(), |e| format_sig17(*e)),
            );
            w.write_record(&row)?;
        }
        w.flush()
    }
}

/// Scientific notation with 17 significant digits.
pub fn format_sig17(v: f64) -> String {
    format!("{v:.16e}")
}
