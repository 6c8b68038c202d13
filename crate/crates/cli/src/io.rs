use std::fs;
use std::path::Path;

use oneshot_core::linalg::json::parse_hermitian;
use oneshot_core::quantum::DensityOperator;
use oneshot_core::{Distribution, HermitianMatrix};
use serde::Serialize;

use crate::{CliError, Format, Output};

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

fn located(path: &Path, e: oneshot_core::Error) -> CliError {
    match CliError::from(e) {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        other => other,
    }
}

pub fn read_distribution(path: &Path) -> Result<Distribution, CliError> {
    Distribution::from_json_str(&read(path)?).map_err(|e| located(path, e))
}

pub fn read_state(path: &Path) -> Result<DensityOperator, CliError> {
    DensityOperator::from_json_str(&read(path)?).map_err(|e| located(path, e))
}

pub fn read_operator(path: &Path) -> Result<HermitianMatrix, CliError> {
    parse_hermitian(&read(path)?)
        .map(|(m, _)| m)
        .map_err(|e| located(path, e))
}

impl Output {
    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn emit(&self, mut text: String) -> Result<(), CliError> {
        if !text.ends_with('\n') {
            text.push('\n');
        }
        match &self.output {
            Some(path) => fs::write(path, text)
                .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    pub fn json<T: Serialize>(&self, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Numerical(format!("cannot serialize result: {e}")))?;
        self.emit(text)
    }

    pub fn csv(
        &self,
        header: &str,
        rows: impl IntoIterator<Item = String>,
    ) -> Result<(), CliError> {
        let mut text = format!("{header}\n");
        for r in rows {
            text.push_str(&r);
            text.push('\n');
        }
        self.emit(text)
    }

    pub fn raw(&self, text: String) -> Result<(), CliError> {
        self.emit(text)
    }
}
