use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use serde_json::{json, Value};

use super::{compute_modpoly, psi, ModularPolynomial, DEFAULT_MAX_PREC};
use crate::error::{Error, Result};
use crate::numeric::IntegerBivariatePoly;

/// Bumped whenever the on-disk layout or the computation changes.
pub const CACHE_VERSION: u32 = 1;

pub const DEFAULT_MAX_LEVEL: u32 = 12;

/// Environment variable naming the cache directory.
pub const CACHE_DIR_ENV: &str = "GEOPROJ_CACHE_DIR";

/// `$GEOPROJ_CACHE_DIR`, else `$XDG_CACHE_HOME/geoproj`, else `~/.cache/geoproj`.
pub fn default_cache_dir() -> Option<PathBuf> {
    if let Some(d) = std::env::var_os(CACHE_DIR_ENV).filter(|d| !d.is_empty()) {
        return Some(PathBuf::from(d));
    }
    if let Some(d) = std::env::var_os("XDG_CACHE_HOME").filter(|d| !d.is_empty()) {
        return Some(PathBuf::from(d).join("geoproj"));
    }
    std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache").join("geoproj"))
}

/// In-memory and on-disk store of modular polynomials and the expanded
/// real curves built from them.
///
/// Reads are concurrent; computation of a missing level is serialized.
pub struct ModularCache {
    dir: Option<PathBuf>,
    max_level: u32,
    max_prec: u32,
    polys: RwLock<HashMap<u32, Arc<ModularPolynomial>>>,
    real_curves: RwLock<HashMap<u32, Arc<IntegerBivariatePoly>>>,
    compute: Mutex<()>,
}

impl ModularCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Self {
            dir,
            max_level: DEFAULT_MAX_LEVEL,
            max_prec: DEFAULT_MAX_PREC,
            polys: RwLock::default(),
            real_curves: RwLock::default(),
            compute: Mutex::new(()),
        }
    }

    pub fn in_memory() -> Self {
        Self::new(None)
    }

    pub fn with_max_level(mut self, max_level: u32) -> Self {
        self.max_level = max_level;
        self
    }

    pub fn with_max_prec(mut self, max_prec: u32) -> Self {
        self.max_prec = max_prec;
        self
    }

    /// Process-wide cache rooted at [`default_cache_dir`].
    pub fn global() -> &'static ModularCache {
        static G: OnceLock<ModularCache> = OnceLock::new();
        G.get_or_init(|| ModularCache::new(default_cache_dir()))
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    fn file_for(&self, n: u32) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(format!("v{CACHE_VERSION}")).join(format!("modpoly_{n}.json")))
    }

    /// `Φ_N`, computed on first use.
    pub fn modpoly(&self, n: u32) -> Result<Arc<ModularPolynomial>> {
        if n == 0 {
            return Err(Error::Precondition("level must be positive".into()));
        }
        if n > self.max_level {
            return Err(Error::LevelTooLarge { level: n, max: self.max_level });
        }
        if let Some(p) = self.polys.read().expect("cache lock").get(&n) {
            return Ok(p.clone());
        }
        let _guard = self.compute.lock().expect("cache lock");
        if let Some(p) = self.polys.read().expect("cache lock").get(&n) {
            return Ok(p.clone());
        }
        let p = match self.load(n) {
            Some(p) => p,
            None => {
                let p = compute_modpoly(n, self.max_prec)?;
                self.store(&p)?;
                p
            }
        };
        let p = Arc::new(p);
        self.polys.write().expect("cache lock").insert(n, p.clone());
        Ok(p)
    }

    fn load(&self, n: u32) -> Option<ModularPolynomial> {
        let text = fs::read_to_string(self.file_for(n)?).ok()?;
        let v: Value = serde_json::from_str(&text).ok()?;
        if v.get("N")?.as_u64()? != n as u64 || v.get("psi")?.as_u64()? != psi(n) as u64 {
            return None;
        }
        let poly = IntegerBivariatePoly::from_json_value(&v).ok()?;
        let d = if n == 1 { 1 } else { psi(n) };
        if poly.degree_in(0) != d || poly.degree_in(1) != d {
            return None;
        }
        Some(ModularPolynomial { level: n, poly, max_residual: 0.0, prec: 0 })
    }

    fn store(&self, p: &ModularPolynomial) -> Result<()> {
        let Some(path) = self.file_for(p.level) else { return Ok(()) };
        let mut v = p.poly.to_json_value();
        let obj = v.as_object_mut().expect("object");
        obj.insert("N".into(), json!(p.level));
        obj.insert("psi".into(), json!(p.psi()));
        let dir = path.parent().expect("versioned subdirectory");
        fs::create_dir_all(dir)?;
        let tmp = dir.join(format!(".modpoly_{}.{}.tmp", p.level, std::process::id()));
        fs::write(&tmp, serde_json::to_string(&v)?)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    /// Memoized value derived from `Φ_N` (used for the expanded real curves).
    pub fn real_curve_poly(
        &self,
        n: u32,
        build: impl FnOnce(&ModularPolynomial) -> Result<IntegerBivariatePoly>,
    ) -> Result<Arc<IntegerBivariatePoly>> {
        if let Some(p) = self.real_curves.read().expect("cache lock").get(&n) {
            return Ok(p.clone());
        }
        let phi = self.modpoly(n)?;
        let p = Arc::new(build(&phi)?);
        self.real_curves.write().expect("cache lock").entry(n).or_insert(p.clone());
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let a = ModularCache::new(Some(dir.path().to_path_buf()));
        let p = a.modpoly(2).unwrap();
        let file = dir.path().join(format!("v{CACHE_VERSION}")).join("modpoly_2.json");
        let v: Value = serde_json::from_str(&fs::read_to_string(&file).unwrap()).unwrap();
        assert_eq!(v["N"], 2);
        assert_eq!(v["psi"], 3);
        assert_eq!(v["degree"], 3);
        let b = ModularCache::new(Some(dir.path().to_path_buf()));
        let q = b.modpoly(2).unwrap();
        assert_eq!(p.poly, q.poly);
        assert_eq!(q.prec, 0, "second cache should load rather than recompute");
    }

    #[test]
    fn level_limit() {
        let c = ModularCache::in_memory().with_max_level(3);
        assert!(matches!(c.modpoly(4), Err(Error::LevelTooLarge { level: 4, max: 3 })));
    }

    #[test]
    fn corrupt_file_is_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        let sub = dir.path().join(format!("v{CACHE_VERSION}"));
        fs::create_dir_all(&sub).unwrap();
        fs::write(sub.join("modpoly_3.json"), "{\"N\": 3, \"psi\": 4, \"degree\": 1, \"terms\": []}").unwrap();
        let c = ModularCache::new(Some(dir.path().to_path_buf()));
        let p = c.modpoly(3).unwrap();
        assert_eq!(p.poly.degree_in(0), 4);
    }
}
