//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use common::*;
use outbreak_core::esda::{lisa, morans_i, Quadrant};
use outbreak_core::features::{assemble_feature_table, DatasetSeries, FeatureInputs};
use outbreak_core::geo::{build_contiguity_weights, ContiguityKind, DEFAULT_TOLERANCE};
use outbreak_core::ingest::{build_panel, read_surveillance, AdminRegion, SurveillanceRecord};
use outbreak_core::learn::metrics::{from_confusion, Confusion};
use outbreak_core::learn::{
    evaluate, permutation_importance, random_split, roc_auc, train_forest, Dataset, ForestParams, SplitSpec,
};
use outbreak_core::pipeline::fixture::{write_mini_region, FixtureSpec};
use outbreak_core::pipeline::{run, PipelineConfig, RunOptions, Stage, StageSelection};
use outbreak_core::raster::{population_near_water, tabulate_area, zonal_mean, RasterGrid};
use rand::Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_budget(t: Instant, limit: Duration) -> Result<Duration, String> {
    let e = t.elapsed();
    check(e < limit, format!("runtime {e:.2?} exceeds {limit:?}"))?;
    Ok(e)
}

// 1. Moran's I vs brute-force double sum, 50 random fields on random 10x10 grids.
fn moran_oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let rook = r.random::<bool>();
        let regions = jittered_lattice(10, 10, 0.3, &mut r);
        let kind = if rook { ContiguityKind::Rook } else { ContiguityKind::Queen };
        let w = build_contiguity_weights(&regions, kind, DEFAULT_TOLERANCE).map_err(|e| e.to_string())?;
        let x: Vec<f64> = (0..100).map(|_| r.random_range(-50.0..50.0)).collect();
        let got = morans_i(&x, &w, 99, case).map_err(|e| e.to_string())?.i;
        let want = moran_oracle(&x, &lattice_weights(10, 10, rook));
        worst = worst.max((got - want).abs());
    }
    check(worst <= 1e-10, format!("max |I - oracle| = {worst:e}"))?;
    let e = within_budget(t, Duration::from_secs(5))?;
    Ok(format!("max |I - oracle| = {worst:.1e} over 50 fields, {e:.2?}"))
}

// 2. Two adjacent regions give I = -1 exactly; 2x2 queen diagonal gives -1/3.
fn two_region_exactness() -> Outcome {
    let mut r = rng(2);
    for _ in 0..500 {
        let (x0, y0) = (r.random_range(-10.0..10.0), r.random_range(-10.0..10.0));
        let (wa, wb, h) = (r.random_range(0.1..3.0), r.random_range(0.1..3.0), r.random_range(0.1..3.0));
        let regions = vec![
            rect_region(1, x0, y0, x0 + wa, y0 + h),
            rect_region(2, x0 + wa, y0, x0 + wa + wb, y0 + h),
        ];
        let w = build_contiguity_weights(&regions, ContiguityKind::Queen, DEFAULT_TOLERANCE)
            .map_err(|e| e.to_string())?;
        let x = [r.random_range(-1e3..1e3), r.random_range(-1e3..1e3)];
        let got = morans_i(&x, &w, 9, 0).map_err(|e| e.to_string())?.i;
        check(got == -1.0, format!("two regions {x:?} gave I = {got:e}"))?;
        let oracle = moran_oracle(&x, &[vec![0.0, 1.0], vec![1.0, 0.0]]);
        check((oracle + 1.0).abs() <= 1e-12, format!("oracle gave {oracle}"))?;
    }
    let regions = jittered_lattice(2, 2, 0.0, &mut r);
    let w = build_contiguity_weights(&regions, ContiguityKind::Queen, DEFAULT_TOLERANCE).map_err(|e| e.to_string())?;
    let x = [1.0, 0.0, 0.0, 1.0];
    let got = morans_i(&x, &w, 99, 0).map_err(|e| e.to_string())?.i;
    let oracle = moran_oracle(&x, &lattice_weights(2, 2, false));
    check((got + 1.0 / 3.0).abs() <= 1e-12, format!("diagonal 2x2 gave {got}"))?;
    check((oracle + 1.0 / 3.0).abs() <= 1e-12, format!("oracle gave {oracle}"))?;
    Ok(format!("500 random pairs gave exactly -1; 2x2 diagonal gave {got}"))
}

// 3. Mean of local Moran values equals global I.
fn lisa_global_identity() -> Outcome {
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let (nx, ny) = (r.random_range(3..12), r.random_range(3..12));
        let regions = jittered_lattice(nx, ny, 0.25, &mut r);
        let kind = if r.random::<bool>() { ContiguityKind::Rook } else { ContiguityKind::Queen };
        let w = build_contiguity_weights(&regions, kind, DEFAULT_TOLERANCE).map_err(|e| e.to_string())?;
        let x: Vec<f64> = (0..nx * ny).map(|_| r.random_range(0.0..100.0)).collect();
        let g = morans_i(&x, &w, 9, case).map_err(|e| e.to_string())?.i;
        let l = lisa(&x, &w, 9, case, 0.05).map_err(|e| e.to_string())?;
        let mean = l.local_values().iter().sum::<f64>() / x.len() as f64;
        worst = worst.max((mean - g).abs());
    }
    check(worst <= 1e-10, format!("max |mean(I_i) - I| = {worst:e}"))?;
    Ok(format!("max |mean(I_i) - I| = {worst:.1e} over 50 instances"))
}

/// 20 x 20 unit grid with a 3 x 3 block of value 10 on a [0, 0.2) background.
fn planted_block(seed: u64) -> (Vec<AdminRegion>, Vec<f64>, BTreeSet<usize>) {
    let mut r = rng(seed);
    let regions = jittered_lattice(20, 20, 0.0, &mut r);
    let block: BTreeSet<usize> = (8..11).flat_map(|j| (8..11).map(move |i| j * 20 + i)).collect();
    let x = (0..400)
        .map(|k| if block.contains(&k) { 10.0 } else { r.random_range(0.0..0.2) })
        .collect();
    (regions, x, block)
}

// 4. p-value floor 1/(999+1) and planted hot-block recovery.
fn permutation_floor() -> Outcome {
    let (regions, x, block) = planted_block(4);
    let w = build_contiguity_weights(&regions, ContiguityKind::Queen, DEFAULT_TOLERANCE).map_err(|e| e.to_string())?;
    let g = morans_i(&x, &w, 999, 0).map_err(|e| e.to_string())?;
    check(g.p_value == 0.001, format!("global p = {}", g.p_value))?;
    let mut r = rng(40);
    for s in 0..5 {
        let y: Vec<f64> = (0..400).map(|_| r.random::<f64>()).collect();
        let p = morans_i(&y, &w, 999, s).map_err(|e| e.to_string())?.p_value;
        check(p >= 0.001, format!("p {p} below the floor"))?;
    }
    let a = lisa(&x, &w, 999, 0, 0.05).map_err(|e| e.to_string())?;
    let b = lisa(&x, &w, 999, 0, 0.05).map_err(|e| e.to_string())?;
    check(a == b, "LISA output differs between identical runs")?;
    // the centre cell is the one whose neighbours all hold the planted value
    let centre = 9 * 20 + 9;
    let mut floor_hits = 0;
    for seed in 0..10 {
        let l = lisa(&x, &w, 999, seed, 0.05).map_err(|e| e.to_string())?;
        let hh: BTreeSet<usize> = (0..400).filter(|&i| l.regions[i].quadrant == Quadrant::HH).collect();
        check(hh == block, format!("seed {seed}: HH set {hh:?} differs from the planted block"))?;
        check(
            l.regions[centre].p_value == 0.001,
            format!("seed {seed}: centre p = {}", l.regions[centre].p_value),
        )?;
        floor_hits += block.iter().filter(|&&i| l.regions[i].p_value == 0.001).count();
    }
    let max_p = block.iter().map(|&i| a.regions[i].p_value).fold(0.0, f64::max);
    Ok(format!(
        "global p = {}; HH = planted block and centre p = 0.001 at 10 seeds; \
         block cells at the floor {floor_hits}/90, max block p {max_p} at seed 0",
        g.p_value
    ))
}

// 5. 4506 x 209 panel gives 941,754 rows; the 2x2x2 example gives 8 records.
fn panel_arithmetic() -> Outcome {
    let start = NaiveDate::from_ymd_opt(2019, 1, 1).unwrap();
    let regions: Vec<AdminRegion> = (0..4506)
        .map(|k| {
            let (i, j) = ((k % 100) as f64, (k / 100) as f64);
            AdminRegion {
                name: format!("d{k}"),
                ..rect_region(k as i64, i, j, i + 1.0, j + 1.0)
            }
        })
        .collect();
    let records = vec![SurveillanceRecord {
        year: 2020,
        week: 5,
        country: "c".into(),
        province: "p".into(),
        district: "d17".into(),
        disease: "Malaria".into(),
        cases: 4,
        deaths: 0,
    }];
    let panel = build_panel(&records, &regions, start, 209, "malaria").map_err(|e| e.to_string())?.panel;
    let n = regions.len();
    let c = |name: &str| DatasetSeries::constant(name, vec![Some(1.0); n]);
    let inputs = FeatureInputs {
        precipitation: c("precipitation"),
        temperature: c("temperature"),
        landcover: [c("trees"), c("crops"), c("built_up"), c("bare_ground"), c("rangeland")],
        population_density: c("population_density"),
        population_near_water: c("population_near_water"),
        relative_wealth: c("relative_wealth"),
        elevation: c("elevation"),
    };
    let table = assemble_feature_table(&panel, &inputs).map_err(|e| e.to_string())?;
    check(table.len() == 941_754, format!("{} feature rows", table.len()))?;
    check(table.positives() == 1, format!("{} positive rows", table.positives()))?;

    let csv = "Year,Week,Country,Province,District,Disease,Number of cases,Number of deaths\n\
               2019,1,C,P,A,Malaria,5,0\n2019,1,C,P,B,Malaria,0,0\n2019,2,C,P,A,Malaria,1,0\n2019,2,C,P,B,Malaria,2,1\n\
               2019,1,C,P,A,Cholera,0,0\n2019,1,C,P,B,Cholera,3,0\n2019,2,C,P,A,Cholera,0,0\n2019,2,C,P,B,Cholera,0,0\n";
    let import = read_surveillance(csv.as_bytes(), "eq").map_err(|e| e.to_string())?;
    check(import.records.len() == 8, format!("{} records", import.records.len()))?;
    let two = vec![
        AdminRegion { name: "A".into(), province: "P".into(), country: "C".into(), ..rect_region(1, 0.0, 0.0, 1.0, 1.0) },
        AdminRegion { name: "B".into(), province: "P".into(), country: "C".into(), ..rect_region(2, 1.0, 0.0, 2.0, 1.0) },
    ];
    let mut cells = 0;
    for disease in ["Malaria", "Cholera"] {
        let p = build_panel(&import.records, &two, start, 2, disease).map_err(|e| e.to_string())?;
        check(p.panel.flattened_len() == 4, "per-disease panel is not 2 x 2")?;
        cells += p.panel.flattened_len();
    }
    check(cells == 8, format!("{cells} panel cells over both diseases"))?;
    Ok("941,754 feature rows; 8 records and 2 x 4 panel cells".into())
}

// 6. Zonal mean, tabulate area and near-water population vs per-cell oracles.
fn raster_oracles() -> Outcome {
    let mut r = rng(6);
    let classes = [1i64, 2, 5, 7];
    let buffers = [0.0, 0.5, 2.0, 5.0, 20.0];
    for fixture in 0..100 {
        let values = random_grid(&mut r, None);
        let regions = random_regions(&mut r, &values);
        let oracle = zonal_oracle(&values, &regions);
        for (z, o) in zonal_mean(&values, &regions).iter().zip(&oracle) {
            let mean = (o.1 > 0).then(|| o.0 / o.1 as f64);
            check(
                z.sum == o.0 && z.cell_count == o.1 && z.nodata_count == o.2 && z.mean == mean,
                format!("fixture {fixture}: zonal {z:?} vs oracle {o:?}"),
            )?;
        }

        let codes = [1.0, 2.0, 5.0, 7.0, 9.0];
        let lc_values = (0..values.len())
            .map(|_| if r.random::<f64>() < 0.05 { -9999.0 } else { codes[r.random_range(0..codes.len())] })
            .collect();
        let lc = RasterGrid::new(values.ncols, values.nrows, values.xll, values.yll, values.cellsize, -9999.0, lc_values)
            .map_err(|e| e.to_string())?;
        let owner = owner_oracle(&lc, &regions);
        for (k, t) in tabulate_area(&lc, &regions, &classes).iter().enumerate() {
            let mine: Vec<usize> = (0..owner.len()).filter(|&i| owner[i] == Some(k)).collect();
            let covered: Vec<usize> = mine.iter().copied().filter(|&i| !is_nodata(&lc, i)).collect();
            check(t.covered == covered.len(), format!("fixture {fixture}: covered"))?;
            check(t.nodata_count == mine.len() - covered.len(), format!("fixture {fixture}: nodata"))?;
            for (c, code) in classes.iter().enumerate() {
                let n = covered.iter().filter(|&&i| lc.values[i] == *code as f64).count();
                let frac = if covered.is_empty() { 0.0 } else { n as f64 / covered.len() as f64 };
                check(
                    t.classes[c].cell_count == n && t.classes[c].fraction == frac,
                    format!("fixture {fixture}: class {code} {:?} vs {n}/{frac}", t.classes[c]),
                )?;
            }
        }

        let water = random_water(&mut r, &values);
        let mut prev: Option<Vec<f64>> = None;
        for &km in &buffers {
            let got: Vec<f64> = population_near_water(&values, &water, km, &regions)
                .map_err(|e| e.to_string())?
                .into_iter()
                .map(|(_, v)| v)
                .collect();
            let want = near_water_oracle(&values, &water, km, &regions);
            check(got == want, format!("fixture {fixture}: near water at {km} km {got:?} vs {want:?}"))?;
            if let Some(p) = &prev {
                check(
                    p.iter().zip(&got).all(|(a, b)| a <= b),
                    format!("fixture {fixture}: not monotone at {km} km"),
                )?;
            }
            prev = Some(got);
        }
    }
    Ok("100 fixtures match the per-cell oracles; near-water monotone in buffer".into())
}

/// Closed forms written differently from the library: f1 via precision and
/// recall, mcc via the four-rate identity.
fn hand_metrics(tp: f64, fp: f64, fn_: f64, tn: f64) -> [f64; 6] {
    let p = tp / (tp + fp);
    let rcl = tp / (tp + fn_);
    let tnr = tn / (tn + fp);
    let npv = tn / (tn + fn_);
    let f1 = 2.0 * p * rcl / (p + rcl);
    let mcc = (p * rcl * tnr * npv).sqrt() - ((1.0 - p) * (1.0 - rcl) * (1.0 - tnr) * (1.0 - npv)).sqrt();
    [(tp + tn) / (tp + fp + fn_ + tn), (rcl + tnr) / 2.0, mcc, f1, p, rcl]
}

fn labels_for(c: (u64, u64, u64, u64)) -> (Vec<u8>, Vec<u8>) {
    let (tp, fp, fn_, tn) = c;
    let mut t = Vec::new();
    let mut p = Vec::new();
    for (n, tv, pv) in [(tp, 1, 1), (fp, 0, 1), (fn_, 1, 0), (tn, 0, 0)] {
        t.extend(std::iter::repeat_n(tv, n as usize));
        p.extend(std::iter::repeat_n(pv, n as usize));
    }
    (t, p)
}

// 7. Metrics on enumerated confusion matrices; AUC vs pairwise brute force.
fn metric_exactness() -> Outcome {
    let named = from_confusion(Confusion { tp: 2, fp: 1, fn_: 1, tn: 6 });
    check((named.f1 - 2.0 / 3.0).abs() <= 1e-12, format!("f1 {}", named.f1))?;
    check((named.mcc - 11.0 / 21.0).abs() <= 1e-12, format!("mcc {}", named.mcc))?;
    let mut matrices = vec![(2, 1, 1, 6)];
    let mut r = rng(7);
    while matrices.len() < 20 {
        matrices.push((r.random_range(1..60), r.random_range(1..60), r.random_range(1..60), r.random_range(1..200)));
    }
    for &(tp, fp, fn_, tn) in &matrices {
        let (truth, pred) = labels_for((tp, fp, fn_, tn));
        let scores: Vec<f64> = pred.iter().map(|&v| v as f64).collect();
        let m = evaluate(&truth, &pred, &scores).map_err(|e| e.to_string())?;
        let want = hand_metrics(tp as f64, fp as f64, fn_ as f64, tn as f64);
        let got = [m.accuracy, m.balanced_accuracy, m.mcc, m.f1, m.precision, m.recall];
        for (g, w) in got.iter().zip(want) {
            check((g - w).abs() <= 1e-12, format!("{:?}: {got:?} vs {want:?}", (tp, fp, fn_, tn)))?;
        }
    }
    for case in 0..50 {
        let n = r.random_range(2..=1000);
        let truth: Vec<u8> = (0..n).map(|_| u8::from(r.random::<f64>() < 0.3)).collect();
        let scores: Vec<f64> = (0..n).map(|_| (r.random_range(0..20) as f64) / 20.0).collect();
        let (pos, neg): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| truth[i] == 1);
        if pos.is_empty() || neg.is_empty() {
            continue;
        }
        let mut wins = 0.0;
        for &i in &pos {
            for &j in &neg {
                wins += if scores[i] > scores[j] {
                    1.0
                } else if scores[i] == scores[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
        let brute = wins / (pos.len() * neg.len()) as f64;
        let got = roc_auc(&truth, &scores).unwrap();
        check((got - brute).abs() <= 1e-12, format!("case {case}: auc {got} vs {brute}"))?;
    }
    Ok("20 confusion matrices and 50 AUC sets within 1e-12".into())
}

fn synthetic(seed: u64, n: usize) -> (Vec<f64>, Vec<f64>, Vec<u8>) {
    let mut r = rng(seed);
    let t = 1.0 - 0.03f64.sqrt();
    let s1: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
    let s2: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
    let y = (0..n).map(|i| u8::from(s1[i] > t && s2[i] > t)).collect();
    (s1, s2, y)
}

// 8. Imbalanced separable signal; label copy ranks first, noise last.
fn classifier_sanity() -> Outcome {
    let t = Instant::now();
    let n = 50_000;
    let trials = 20;
    let (mut min_f1, mut copy_first, mut noise_last) = (f64::INFINITY, 0, 0);
    let mut positives = 0.0;
    for trial in 0..trials {
        let seed = 800 + trial as u64;
        let (s1, s2, y) = synthetic(seed, n);
        positives += y.iter().filter(|&&v| v == 1).count() as f64 / n as f64;
        let spec = SplitSpec { seed, ..Default::default() };
        let params = ForestParams { seed, ..Default::default() };

        let base = Dataset::from_columns(&["s1", "s2"], &[s1.clone(), s2.clone()], y.clone()).map_err(|e| e.to_string())?;
        let (train, test) = random_split(&base, &spec).map_err(|e| e.to_string())?;
        let model = train_forest(&train, &params).map_err(|e| e.to_string())?;
        let (pred, scores) = model.predict(&test).map_err(|e| e.to_string())?;
        min_f1 = min_f1.min(evaluate(&test.y, &pred, &scores).map_err(|e| e.to_string())?.f1);

        let mut r = rng(seed ^ 0xabc);
        let noise: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
        let copy: Vec<f64> = y.iter().map(|&v| v as f64).collect();
        let full = Dataset::from_columns(&["noise", "s1", "s2", "label_copy"], &[noise, s1, s2, copy], y)
            .map_err(|e| e.to_string())?;
        let (train, test) = random_split(&full, &spec).map_err(|e| e.to_string())?;
        let model = train_forest(&train, &params).map_err(|e| e.to_string())?;
        let rank = permutation_importance(&model, &test, 3, seed).map_err(|e| e.to_string())?;
        // competition ranking: tied features share a rank
        let imp = |name: &str| rank.iter().find(|f| f.feature == name).unwrap().importance_mean;
        let (c, z) = (imp("label_copy"), imp("noise"));
        copy_first += usize::from(rank.iter().all(|f| f.feature == "label_copy" || f.importance_mean < c));
        noise_last += usize::from(rank.iter().all(|f| f.importance_mean >= z));
    }
    let need = (0.95 * trials as f64).ceil() as usize;
    let pos_share = positives / trials as f64;
    check((pos_share - 0.03).abs() < 0.002, format!("positive share {pos_share}"))?;
    check(min_f1 >= 0.95, format!("minimum test F1 {min_f1}"))?;
    check(copy_first >= need, format!("label copy first in {copy_first}/{trials}"))?;
    check(noise_last >= need, format!("noise last in {noise_last}/{trials}"))?;
    let e = within_budget(t, Duration::from_secs(60))?;
    Ok(format!(
        "min F1 {min_f1:.4}, copy first {copy_first}/{trials}, noise last {noise_last}/{trials}, {e:.2?}"
    ))
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != ".lock")
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect();
    out.sort();
    out
}

// 9. Bit-identical artifacts across repeated runs at 1 and 8 threads.
fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg_path = write_mini_region(dir.path(), &FixtureSpec::default()).map_err(|e| e.to_string())?;
    let base = PipelineConfig::load(&cfg_path).map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for (threads, rep) in [(1, 0), (1, 1), (8, 0), (8, 1)] {
        let mut cfg = base.clone();
        cfg.output_dir = format!("out_t{threads}").into();
        let opts = RunOptions { force: true, threads };
        run(&cfg, StageSelection::ALL, opts).map_err(|e| e.to_string())?;
        let files = artifacts(&cfg.resolve(&cfg.output_dir));
        runs.push(((threads, rep), files));
    }
    let reference = &runs[0].1;
    let expected = Stage::ALL.iter().map(|s| s.outputs().len()).sum::<usize>() + 1;
    check(reference.len() == expected, format!("{} artifacts, expected {expected}", reference.len()))?;
    for (label, files) in &runs[1..] {
        for ((name, a), (_, b)) in reference.iter().zip(files) {
            check(a == b, format!("{name} differs in run {label:?}"))?;
        }
    }
    Ok(format!("{} artifacts identical over 2 runs x {{1, 8}} threads", reference.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("Moran's I oracle equivalence", moran_oracle_equivalence),
        ("two-region exactness", two_region_exactness),
        ("LISA/global identity", lisa_global_identity),
        ("permutation floor and planted block", permutation_floor),
        ("panel arithmetic", panel_arithmetic),
        ("raster oracles", raster_oracles),
        ("metric exactness", metric_exactness),
        ("classifier sanity", classifier_sanity),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "SKIP criterion 10: full-data reproduction: needs the complete surveillance export and \
         source rasters; run manually as described in the README"
    );
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
