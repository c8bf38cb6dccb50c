use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::CliError;

/// Pretty JSON with shortest round-trip floats and a trailing newline.
pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::new(super::EXIT_INTERNAL, format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// CSV with a header row; numbers at 12 significant digits.
pub(crate) struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, values: &[f64]) {
        for (k, v) in values.iter().enumerate() {
            if k > 0 {
                self.text.push(',');
            }
            let _ = write!(self.text, "{v:.11e}");
        }
        self.text.push('\n');
    }

    /// Leading integer column followed by numbers.
    pub fn row_indexed(&mut self, index: usize, values: &[f64]) {
        let _ = write!(self.text, "{index},");
        self.row(values);
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, &self.text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(&[1.0 / 3.0, -2.5e-7]);
        c.row_indexed(4, &[1.0]);
        assert_eq!(c.text, "a,b\n3.33333333333e-1,-2.50000000000e-7\n4,1.00000000000e0\n");
    }
}
