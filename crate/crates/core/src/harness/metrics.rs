use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "epoch,train_loss,val_loss,val_accuracy";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

/// Per-epoch training curve. Epochs run contiguously from 1.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunMetrics {
    pub rows: Vec<EpochRecord>,
}

/// Scientific notation with 17 significant digits; round-trips every `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl RunMetrics {
    pub fn push(&mut self, train_loss: f64, val_loss: f64, val_accuracy: f64) {
        let epoch = self.rows.len() + 1;
        self.rows.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            val_accuracy,
        });
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.rows.last()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                r.epoch,
                format_float(r.train_loss),
                format_float(r.val_loss),
                format_float(r.val_accuracy)
            );
        }
        s
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(CSV_HEADER) {
            return Err(Error::format(0, "missing metrics header"));
        }
        let mut m = RunMetrics::default();
        let mut offset = CSV_HEADER.len() as u64 + 1;
        for line in lines {
            let f: Vec<&str> = line.split(',').collect();
            let parsed = (f.len() == 4)
                .then(|| {
                    Some(EpochRecord {
                        epoch: f[0].parse().ok()?,
                        train_loss: f[1].parse().ok()?,
                        val_loss: f[2].parse().ok()?,
                        val_accuracy: f[3].parse().ok()?,
                    })
                })
                .flatten();
            match parsed {
                Some(r) if r.epoch == m.rows.len() + 1 => m.rows.push(r),
                _ => return Err(Error::format(offset, format!("bad metrics row `{line}`"))),
            }
            offset += line.len() as u64 + 1;
        }
        Ok(m)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_csv()).map_err(|e| Error::io(path.as_ref(), e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_schema() {
        let mut m = RunMetrics::default();
        m.push(10f64.ln(), 1.0 / 3.0, 0.9);
        let csv = m.to_csv();
        assert_eq!(
            csv,
            "epoch,train_loss,val_loss,val_accuracy\n\
             1,2.3025850929940459e0,3.3333333333333331e-1,9.0000000000000002e-1\n"
        );
        assert_eq!(RunMetrics::parse_csv(&csv).unwrap(), m);
    }

    #[test]
    fn rejects_gaps() {
        let text = "epoch,train_loss,val_loss,val_accuracy\n2,1,1,1\n";
        assert!(RunMetrics::parse_csv(text).is_err());
    }

    proptest::proptest! {
        #[test]
        fn floats_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::ZERO) {
            proptest::prop_assert_eq!(format_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
