//! Work caps shared by every brute-force path.
//!
//! The cap defaults to 2^26 and can be overridden with the
//! `PADIC_LAB_BUDGET` environment variable.

use std::sync::OnceLock;

use crate::error::{LabError, Result};

pub const BUDGET_ENV: &str = "PADIC_LAB_BUDGET";
pub const DEFAULT_BUDGET: u128 = 1 << 26;

/// Dense bitmaps are used for point sets whose ambient size is at most this.
pub const BITMAP_THRESHOLD: u128 = 1 << 26;

pub fn search_budget() -> u128 {
    static BUDGET: OnceLock<u128> = OnceLock::new();
    *BUDGET.get_or_init(|| {
        std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u128>().ok())
            .filter(|&b| b > 0)
            .unwrap_or(DEFAULT_BUDGET)
    })
}

pub fn check_search(size: u128) -> Result<()> {
    let budget = search_budget();
    if size > budget {
        Err(LabError::SearchSpaceTooLarge { size, budget })
    } else {
        Ok(())
    }
}

/// Same as [`check_search`] but for aggregate work estimates of experiments.
pub fn check_work(size: u128, budget: u128) -> Result<()> {
    if size > budget {
        Err(LabError::BudgetExceeded { size, budget })
    } else {
        Ok(())
    }
}
