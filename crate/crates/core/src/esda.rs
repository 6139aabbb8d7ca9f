//! Global Moran's I and local Moran (LISA) with permutation inference.
//!
//! Island regions are dropped before anything is computed: the mean,
//! the variance term and the permutation pool all use non-island regions only.
//!
//! Global permutations draw from `ChaCha8(seed ^ k)` for permutation `k`.
//! Local (conditional) permutations draw from stream `i` of `ChaCha8(seed)`
//! for region `i`. Both are independent of how the work is split across
//! threads.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geo::SpatialWeights;
use crate::ingest::AdminRegion;
use crate::{par, rng};

pub const DEFAULT_PERMUTATIONS: usize = 999;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalMoranResult {
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "expected_I")]
    pub expected_i: f64,
    pub p_value: f64,
    pub n_permutations: usize,
    pub n_used: usize,
    pub seed: u64,
    /// Mean and standard deviation of the permutation distribution.
    pub sim_mean: f64,
    pub sim_std: f64,
}

/// Non-island subset with deviations from its own mean.
struct Prepared<'a> {
    w: &'a SpatialWeights,
    /// original index of each used region
    used: Vec<usize>,
    /// compact index of each original region, `usize::MAX` for islands
    compact: Vec<usize>,
    z: Vec<f64>,
    sum_z2: f64,
}

impl<'a> Prepared<'a> {
    fn new(x: &[f64], w: &'a SpatialWeights) -> Result<Self> {
        if x.len() != w.n {
            return Err(Error::LengthMismatch {
                expected: w.n,
                found: x.len(),
            });
        }
        if let Some(bad) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("value at {bad} is not finite")));
        }
        let used: Vec<usize> = (0..w.n).filter(|&i| !w.is_island(i)).collect();
        // Two nodes already determine the statistic (I = -1); inference needs more.
        if used.len() < 2 {
            return Err(Error::InsufficientRegions {
                required: 2,
                found: used.len(),
            });
        }
        let first = x[used[0]];
        if used.iter().all(|&i| x[i] == first) {
            return Err(Error::ConstantField);
        }
        let mut compact = vec![usize::MAX; w.n];
        for (k, &i) in used.iter().enumerate() {
            compact[i] = k;
        }
        let z: Vec<f64> = if let [a, b] = used[..] {
            // half-differences keep the pair exactly antisymmetric
            vec![(x[a] - x[b]) / 2.0, (x[b] - x[a]) / 2.0]
        } else {
            let mean = used.iter().map(|&i| x[i]).sum::<f64>() / used.len() as f64;
            used.iter().map(|&i| x[i] - mean).collect()
        };
        let sum_z2 = z.iter().map(|v| v * v).sum();
        Ok(Prepared {
            w,
            used,
            compact,
            z,
            sum_z2,
        })
    }

    fn n(&self) -> usize {
        self.used.len()
    }

    /// Lag of the compact vector `z` at compact position `k`.
    fn lag(&self, z: &[f64], k: usize) -> f64 {
        let i = self.used[k];
        self.w.neighbors[i]
            .iter()
            .zip(&self.w.weights[i])
            .map(|(&j, &wt)| wt * z[self.compact[j]])
            .sum()
    }

    fn cross_product(&self, z: &[f64]) -> f64 {
        (0..self.n()).map(|k| z[k] * self.lag(z, k)).sum()
    }

    fn s0(&self) -> f64 {
        self.used.iter().map(|&i| self.w.weights[i].iter().sum::<f64>()).sum()
    }
}

fn pseudo_p(observed: f64, expected: f64, sims: &[f64]) -> f64 {
    let extreme = if observed >= expected {
        sims.iter().filter(|&&s| s >= observed).count()
    } else {
        sims.iter().filter(|&&s| s <= observed).count()
    };
    (extreme + 1) as f64 / (sims.len() + 1) as f64
}

pub fn morans_i(x: &[f64], w: &SpatialWeights, n_perm: usize, seed: u64) -> Result<GlobalMoranResult> {
    if n_perm < 1 {
        return Err(Error::InvalidParameter("n_perm must be >= 1".into()));
    }
    let prep = Prepared::new(x, w)?;
    let n = prep.n() as f64;
    let scale = n / prep.s0();
    let observed = scale * (prep.cross_product(&prep.z) / prep.sum_z2);
    let expected = -1.0 / (n - 1.0);

    let sims = par::map_range(n_perm, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ k as u64);
        let mut z = prep.z.clone();
        z.shuffle(&mut rng);
        scale * (prep.cross_product(&z) / prep.sum_z2)
    });
    let sim_mean = sims.iter().sum::<f64>() / sims.len() as f64;
    let sim_var = sims.iter().map(|s| (s - sim_mean).powi(2)).sum::<f64>() / sims.len() as f64;

    Ok(GlobalMoranResult {
        i: observed,
        expected_i: expected,
        p_value: pseudo_p(observed, expected, &sims),
        n_permutations: n_perm,
        n_used: prep.n(),
        seed,
        sim_mean,
        sim_std: sim_var.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quadrant {
    HH,
    LL,
    HL,
    LH,
    NS,
    #[serde(rename = "ISLAND")]
    Island,
}

impl Quadrant {
    pub fn as_str(self) -> &'static str {
        match self {
            Quadrant::HH => "HH",
            Quadrant::LL => "LL",
            Quadrant::HL => "HL",
            Quadrant::LH => "LH",
            Quadrant::NS => "NS",
            Quadrant::Island => "ISLAND",
        }
    }

    /// Quadrant from the signs of the deviation and its lag, before any
    /// significance filter.
    pub fn from_signs(z: f64, lag: f64) -> Quadrant {
        match (z.partial_cmp(&0.0), lag.partial_cmp(&0.0)) {
            (Some(std::cmp::Ordering::Greater), Some(std::cmp::Ordering::Greater)) => Quadrant::HH,
            (Some(std::cmp::Ordering::Less), Some(std::cmp::Ordering::Less)) => Quadrant::LL,
            (Some(std::cmp::Ordering::Greater), Some(std::cmp::Ordering::Less)) => Quadrant::HL,
            (Some(std::cmp::Ordering::Less), Some(std::cmp::Ordering::Greater)) => Quadrant::LH,
            _ => Quadrant::NS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalMoran {
    pub local_i: f64,
    pub quadrant: Quadrant,
    pub p_value: f64,
    /// Deviation of the region's value from the non-island mean.
    pub z_value: f64,
    /// Spatial lag of the deviations.
    pub lag: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LisaResult {
    pub regions: Vec<LocalMoran>,
    pub alpha: f64,
    pub n_permutations: usize,
    pub seed: u64,
}

impl LisaResult {
    pub fn local_values(&self) -> Vec<f64> {
        self.regions.iter().map(|r| r.local_i).collect()
    }

    pub fn count(&self, q: Quadrant) -> usize {
        self.regions.iter().filter(|r| r.quadrant == q).count()
    }
}

/// Local Moran with conditional permutation inference. For region `i`, its
/// own value is held fixed and `|N(i)|` values are drawn without replacement
/// from the other non-island regions, `n_perm` times.
pub fn lisa(x: &[f64], w: &SpatialWeights, n_perm: usize, seed: u64, alpha: f64) -> Result<LisaResult> {
    if n_perm < 1 {
        return Err(Error::InvalidParameter("n_perm must be >= 1".into()));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} must be in (0, 1]")));
    }
    let prep = Prepared::new(x, w)?;
    let n = prep.n();
    let m2 = prep.sum_z2 / n as f64;
    let mean = {
        let k = prep.used[0];
        x[k] - prep.z[0]
    };

    let regions = par::map_range(w.n, |i| {
        let k = prep.compact[i];
        if k == usize::MAX {
            return LocalMoran {
                local_i: 0.0,
                quadrant: Quadrant::Island,
                p_value: 1.0,
                z_value: x[i] - mean,
                lag: 0.0,
            };
        }
        let zi = prep.z[k];
        let lag = prep.lag(&prep.z, k);
        let local_i = zi / m2 * lag;

        let wts = &w.weights[i];
        let mut pool: Vec<usize> = (0..n).filter(|&j| j != k).collect();
        let mut rng = rng::stream(seed, i as u64);
        let mut extreme = 0usize;
        for _ in 0..n_perm {
            let mut lag_sim = 0.0;
            for (t, wt) in wts.iter().enumerate() {
                let r = rng.random_range(t..pool.len());
                pool.swap(t, r);
                lag_sim += wt * prep.z[pool[t]];
            }
            let sim = zi / m2 * lag_sim;
            if (local_i >= 0.0 && sim >= local_i) || (local_i < 0.0 && sim <= local_i) {
                extreme += 1;
            }
        }
        let p_value = (extreme + 1) as f64 / (n_perm + 1) as f64;
        let quadrant = if p_value > alpha {
            Quadrant::NS
        } else {
            Quadrant::from_signs(zi, lag)
        };
        LocalMoran {
            local_i,
            quadrant,
            p_value,
            z_value: zi,
            lag,
        }
    });
    Ok(LisaResult {
        regions,
        alpha,
        n_permutations: n_perm,
        seed,
    })
}

/// GeoJSON FeatureCollection of the regions annotated with LISA output.
pub fn lisa_geojson(regions: &[AdminRegion], lisa: &LisaResult) -> Result<Value> {
    if regions.len() != lisa.regions.len() {
        return Err(Error::LengthMismatch {
            expected: regions.len(),
            found: lisa.regions.len(),
        });
    }
    let ring = |r: &Vec<crate::geometry::Coord>| -> Value {
        Value::Array(r.iter().map(|c| json!([c.x, c.y])).collect())
    };
    let features: Vec<Value> = regions
        .iter()
        .zip(&lisa.regions)
        .map(|(r, l)| {
            let polys: Vec<Value> = r
                .geometry
                .parts()
                .iter()
                .map(|p| Value::Array(p.rings().map(ring).collect()))
                .collect();
            json!({
                "type": "Feature",
                "properties": {
                    "adm_id": r.adm_id,
                    "name": r.name,
                    "quadrant": l.quadrant.as_str(),
                    "local_I": l.local_i,
                    "p_value": l.p_value,
                },
                "geometry": { "type": "MultiPolygon", "coordinates": polys },
            })
        })
        .collect();
    Ok(json!({ "type": "FeatureCollection", "features": features }))
}

pub fn export_lisa_geojson(regions: &[AdminRegion], lisa: &LisaResult, path: impl AsRef<Path>) -> Result<()> {
    let doc = lisa_geojson(regions, lisa)?;
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer(BufWriter::new(f), &doc)?;
    Ok(())
}

/// CSV of `adm_id, local_I, p_value, quadrant`.
pub fn export_lisa_csv(regions: &[AdminRegion], lisa: &LisaResult, path: impl AsRef<Path>) -> Result<()> {
    if regions.len() != lisa.regions.len() {
        return Err(Error::LengthMismatch {
            expected: regions.len(),
            found: lisa.regions.len(),
        });
    }
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(f));
    w.write_record(["adm_id", "local_I", "p_value", "quadrant"])?;
    for (r, l) in regions.iter().zip(&lisa.regions) {
        w.write_record([
            r.adm_id.to_string(),
            l.local_i.to_string(),
            l.p_value.to_string(),
            l.quadrant.as_str().to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
