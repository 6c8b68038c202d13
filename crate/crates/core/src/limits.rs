/// Resource caps shared by the enumeration-heavy operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Maximum number of cells (product outcomes or type classes) to enumerate.
    pub max_cells: usize,
}

pub const DEFAULT_MAX_CELLS: usize = 5_000_000;
pub const MAX_CELLS_ENV: &str = "ONESHOT_MAX_CELLS";

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_cells: DEFAULT_MAX_CELLS,
        }
    }
}

impl Caps {
    /// Defaults, overridden by `ONESHOT_MAX_CELLS` when it parses as a count.
    pub fn from_env() -> Self {
        let max_cells = std::env::var(MAX_CELLS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .unwrap_or(DEFAULT_MAX_CELLS);
        Caps { max_cells }
    }
}
