//! Process-wide size limit for dense state vectors.
//!
//! The default cap is 20 qubits (16 MiB of amplitudes). The environment
//! variable `MACROLAB_DENSE_CAP` overrides it on first use, and
//! [`set_dense_cap`] overrides both.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};

pub const DEFAULT_DENSE_CAP: usize = 20;
pub const DENSE_CAP_ENV: &str = "MACROLAB_DENSE_CAP";

/// Hard ceiling independent of configuration; 2^30 amplitudes is 16 GiB.
const ABSOLUTE_MAX: usize = 30;

static DENSE_CAP: AtomicUsize = AtomicUsize::new(0);

pub fn dense_cap() -> usize {
    match DENSE_CAP.load(Ordering::Relaxed) {
        0 => {
            let cap = std::env::var(DENSE_CAP_ENV)
                .ok()
                .and_then(|v| v.trim().parse::<usize>().ok())
                .filter(|&c| c >= 1)
                .map_or(DEFAULT_DENSE_CAP, |c| c.min(ABSOLUTE_MAX));
            // another thread may have raced us; either value came from the same source
            let _ = DENSE_CAP.compare_exchange(0, cap, Ordering::Relaxed, Ordering::Relaxed);
            DENSE_CAP.load(Ordering::Relaxed)
        }
        cap => cap,
    }
}

pub fn set_dense_cap(cap: usize) -> Result<()> {
    if cap == 0 || cap > ABSOLUTE_MAX {
        return Err(Error::invalid(format!(
            "dense cap must be in 1..={ABSOLUTE_MAX}, got {cap}"
        )));
    }
    DENSE_CAP.store(cap, Ordering::Relaxed);
    Ok(())
}

pub fn check_dense(n: usize) -> Result<()> {
    let cap = dense_cap();
    if n > cap {
        Err(Error::ResourceLimit { n, cap })
    } else {
        Ok(())
    }
}
