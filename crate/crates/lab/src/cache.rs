//! On-disk bubble cache keyed by `(N, s, t, r_min, r_max, n, tol)`.
//!
//! Entries are profile text files. Each key has its own lock file, held with an
//! exclusive advisory lock while the entry is checked, solved and written.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use fhs_core::{profile_from_text, profile_to_text, solve_bubble, Bubble, Params, RadialGrid};

use crate::error::{LabError, Result};

pub const CACHE_ENV: &str = "FHS_LAB_CACHE_DIR";

#[derive(Debug, Clone)]
pub struct BubbleCache {
    dir: PathBuf,
}

/// A bubble and whether it came from the cache.
#[derive(Debug, Clone)]
pub struct Cached {
    pub bubble: Bubble,
    pub hit: bool,
    pub path: PathBuf,
}

impl BubbleCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// `$FHS_LAB_CACHE_DIR` when set, otherwise `fallback`.
    pub fn from_env(fallback: &Path) -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Self::new(d),
            _ => Self::new(fallback),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(params: &Params, grid: &RadialGrid, tol: f64) -> String {
        format!(
            "bubble_N{}_s{:?}_t{:?}_rmin{:?}_rmax{:?}_n{}_tol{:?}",
            params.dim(),
            params.s(),
            params.t(),
            grid.r_min(),
            grid.r_max(),
            grid.len(),
            tol
        )
    }

    pub fn entry(&self, params: &Params, grid: &RadialGrid, tol: f64) -> PathBuf {
        self.dir.join(format!("{}.txt", Self::key(params, grid, tol)))
    }

    /// Loads the entry for the key or solves and stores it. Unreadable or mismatched
    /// entries are replaced, with a warning.
    pub fn load_or_solve(
        &self,
        params: &Params,
        grid: &RadialGrid,
        tol: f64,
        warnings: &mut Vec<String>,
    ) -> Result<Cached> {
        fs::create_dir_all(&self.dir).map_err(LabError::io(&self.dir))?;
        let path = self.entry(params, grid, tol);
        let lock_path = path.with_extension("lock");
        let lock = File::create(&lock_path).map_err(LabError::io(&lock_path))?;
        lock.lock().map_err(LabError::io(&lock_path))?;

        if path.exists() {
            match fs::read_to_string(&path)
                .map_err(|e| e.to_string())
                .and_then(|text| check(&text, params, grid))
            {
                Ok(bubble) => {
                    return Ok(Cached {
                        bubble,
                        hit: true,
                        path,
                    })
                }
                Err(why) => warnings.push(format!(
                    "cache entry {} is corrupt ({why}); recomputing",
                    path.display()
                )),
            }
        }
        let bubble = solve_bubble(params, grid, tol)?;
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, profile_to_text(&bubble)).map_err(LabError::io(&tmp))?;
        fs::rename(&tmp, &path).map_err(LabError::io(&path))?;
        Ok(Cached {
            bubble,
            hit: false,
            path,
        })
    }
}

fn check(text: &str, params: &Params, grid: &RadialGrid) -> std::result::Result<Bubble, String> {
    let b = profile_from_text(text).map_err(|e| e.to_string())?;
    if b.params() != params {
        return Err("parameters differ from the key".into());
    }
    if b.grid() != grid {
        return Err("grid differs from the key".into());
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fhs_core::make_log_grid;

    fn small() -> (Params, RadialGrid) {
        (
            Params::new(2, 0.75, 0.5).unwrap(),
            make_log_grid(1e-24, 1e24, 3073).unwrap(),
        )
    }

    #[test]
    fn second_load_hits_and_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let cache = BubbleCache::new(dir.path());
        let (p, g) = small();
        let mut w = Vec::new();
        let first = cache.load_or_solve(&p, &g, 1e-9, &mut w).unwrap();
        assert!(!first.hit);
        let second = cache.load_or_solve(&p, &g, 1e-9, &mut w).unwrap();
        assert!(second.hit && w.is_empty());
        let bits = |b: &Bubble| b.profile().values().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&first.bubble), bits(&second.bubble));
        assert_eq!(first.bubble.mu().to_bits(), second.bubble.mu().to_bits());
    }

    #[test]
    fn key_changes_with_every_field() {
        let (p, g) = small();
        let base = BubbleCache::key(&p, &g, 1e-9);
        let others = [
            BubbleCache::key(&p, &make_log_grid(1e-24, 1e24, 3074).unwrap(), 1e-9),
            BubbleCache::key(&p, &make_log_grid(1e-23, 1e24, 3073).unwrap(), 1e-9),
            BubbleCache::key(&p, &make_log_grid(1e-24, 1e23, 3073).unwrap(), 1e-9),
            BubbleCache::key(&p, &g, 1e-8),
            BubbleCache::key(&Params::new(3, 0.75, 0.5).unwrap(), &g, 1e-9),
            BubbleCache::key(&Params::new(2, 0.8, 0.5).unwrap(), &g, 1e-9),
            BubbleCache::key(&Params::new(2, 0.75, 0.4).unwrap(), &g, 1e-9),
        ];
        for k in others {
            assert_ne!(k, base);
        }
    }

    #[test]
    fn corrupt_entry_is_recomputed_with_warning() {
        let dir = tempfile::tempdir().unwrap();
        let cache = BubbleCache::new(dir.path());
        let (p, g) = small();
        fs::write(cache.entry(&p, &g, 1e-9), "# N = 2\n1.0 oops\n").unwrap();
        let mut w = Vec::new();
        let c = cache.load_or_solve(&p, &g, 1e-9, &mut w).unwrap();
        assert!(!c.hit);
        assert_eq!(w.len(), 1);
        assert!(w[0].contains("corrupt"));
        let mut w = Vec::new();
        assert!(cache.load_or_solve(&p, &g, 1e-9, &mut w).unwrap().hit);
        assert!(w.is_empty());
    }
}
