use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::harness::run::{ExperimentResult, LocalEstimate, RegionMean};
use crate::mixture::{region_slice_raster, write_mixture, MixtureState, RasterGrid};
use crate::targets::Target;

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn cells(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn blanks(n: usize) -> String {
    vec![""; n].join(",")
}

fn numbered(prefix: &str, d: usize) -> String {
    (1..=d)
        .map(|i| format!("{prefix}_{i}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Writes every output file into `dir`, returning the paths written.
pub fn write_outputs(res: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut note = |name: &str| written.push(dir.join(name));
    let scn = &res.scenario;
    let cfg = &scn.config;
    let d = scn.target.dim();

    fs::write(dir.join("config.txt"), cfg.render())?;
    note("config.txt");

    let mut w = create(dir, "summary.csv")?;
    writeln!(
        w,
        "scenario,algorithm,replicate,seed,config_hash,n,ar,{},{},mse_sum,{},dn_hat",
        numbered("mean", d),
        numbered("mse", d),
        numbered("bias", d)
    )?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    for r in &res.replicates {
        let s = &r.summary;
        let (mse, bias, sum) = if s.mse.is_empty() {
            (blanks(d), blanks(d), String::new())
        } else {
            (
                cells(&s.mse),
                cells(&s.bias),
                s.mse.iter().sum::<f64>().to_string(),
            )
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            cfg.name,
            r.algorithm,
            r.replicate,
            cfg.seed,
            res.hash,
            r.n,
            s.acceptance_rate,
            cells(&s.coord_means),
            mse,
            sum,
            bias,
            opt(s.dn_hat)
        )?;
    }
    for a in &res.aggregates {
        writeln!(
            w,
            "{},{},all,{},{},{},{},{},{},{},{},{}",
            cfg.name,
            a.algorithm,
            cfg.seed,
            res.hash,
            a.n,
            a.ar,
            cells(&a.means),
            a.mse.as_deref().map_or(blanks(d), cells),
            opt(a.mse_sum()),
            a.bias.as_deref().map_or(blanks(d), cells),
            opt(a.dn_bar)
        )?;
    }
    w.flush()?;
    note("summary.csv");

    if scn.oracle.is_some() {
        let mut w = create(dir, "dn_trace.csv")?;
        writeln!(w, "algorithm,replicate,n,dn_hat")?;
        for r in &res.replicates {
            for (n, v) in &r.dn_trace {
                writeln!(w, "{},{},{n},{v}", r.algorithm, r.replicate)?;
            }
        }
        for a in &res.aggregates {
            for (n, v) in &a.dn_trace {
                writeln!(w, "{},all,{n},{v}", a.algorithm)?;
            }
        }
        w.flush()?;
        note("dn_trace.csv");
    }

    let (ax, ay) = scn.raster_axes;
    let regional: Vec<_> = res
        .aggregates
        .iter()
        .filter(|a| a.local.is_some())
        .collect();
    if !regional.is_empty() {
        let mut w = create(dir, "local_estimates.csv")?;
        writeln!(
            w,
            "algorithm,replicate,region,weight,{},{},corr_{}_{}",
            numbered("mean", d),
            numbered("var", d),
            ax + 1,
            ay + 1
        )?;
        let row = |w: &mut BufWriter<File>,
                   alg: &str,
                   rep: &str,
                   k: usize,
                   e: &LocalEstimate|
         -> Result<()> {
            let vars: Vec<f64> = (0..d).map(|i| e.cov[(i, i)]).collect();
            writeln!(
                w,
                "{alg},{rep},{},{},{},{},{}",
                k + 1,
                e.weight,
                cells(&e.mean),
                cells(&vars),
                e.corr(ax, ay)
            )?;
            Ok(())
        };
        for r in &res.replicates {
            for (k, e) in r.local.iter().flatten().enumerate() {
                row(&mut w, r.algorithm.name(), &r.replicate.to_string(), k, e)?;
            }
        }
        for a in &regional {
            for (k, e) in a.local.iter().flatten().enumerate() {
                row(&mut w, a.algorithm.name(), "all", k, e)?;
            }
        }
        w.flush()?;
        note("local_estimates.csv");

        let names = scn.target.coord_names();
        let mut w = create(dir, "region_means.csv")?;
        writeln!(w, "algorithm,replicate,region,count,{}", names.join(","))?;
        let row = |w: &mut BufWriter<File>, alg: &str, rep: &str, m: &RegionMean| -> Result<()> {
            let region = if m.region == 0 {
                "whole".to_string()
            } else {
                m.region.to_string()
            };
            writeln!(w, "{alg},{rep},{region},{},{}", m.count, cells(&m.mean))?;
            Ok(())
        };
        for r in &res.replicates {
            for m in r.region_means.iter().flatten() {
                row(&mut w, r.algorithm.name(), &r.replicate.to_string(), m)?;
            }
        }
        for a in &regional {
            for m in a.region_means.iter().flatten() {
                row(&mut w, a.algorithm.name(), "all", m)?;
            }
        }
        w.flush()?;
        note("region_means.csv");

        let mut w = create(dir, "mode_switches.csv")?;
        writeln!(w, "algorithm,replicate,chain,switches")?;
        for r in &res.replicates {
            for (i, s) in r.switches.iter().flatten().enumerate() {
                writeln!(w, "{},{},{},{s}", r.algorithm, r.replicate, i + 1)?;
            }
        }
        w.flush()?;
        note("mode_switches.csv");
    }

    if let Some(mix) = res
        .replicates
        .iter()
        .find(|r| r.replicate == 0)
        .and_then(|r| r.final_mixture.as_ref())
    {
        write_mixture(mix, create(dir, "mixture_final.txt")?)?;
        note("mixture_final.txt");
        written.extend(
            write_rasters(mix, (ax, ay), cfg.raster_res, dir)?
                .into_iter()
                .map(|(_, p)| p),
        );
    }

    let names = scn.target.coord_names();
    let m = cfg.chains;
    let traced: Vec<_> = res
        .replicates
        .iter()
        .filter(|r| r.traces.is_some())
        .collect();
    if !traced.is_empty() {
        for (c, name) in names.iter().enumerate() {
            let file = format!("trace_{name}.csv");
            let mut w = create(dir, &file)?;
            writeln!(w, "algorithm,iteration,{}", numbered("chain", m))?;
            for r in &traced {
                let tr = r.traces.as_ref().expect("filtered");
                for (t, sweep) in tr.chunks(m * d).enumerate() {
                    let vals: Vec<f64> = (0..m).map(|i| sweep[i * d + c]).collect();
                    writeln!(w, "{},{},{}", r.algorithm, t + 1, cells(&vals))?;
                }
            }
            w.flush()?;
            written.push(dir.join(file));
        }
    }
    Ok(written)
}

/// Region slices over `axes`, with the other coordinates pinned at each
/// component mean (`raster_region<k>.txt`) and at the whole-space mean
/// (`raster_whole.txt`). The grid spans ±3.5 whole-space standard deviations.
pub fn write_rasters(
    mix: &MixtureState<f64>,
    axes: (usize, usize),
    res: usize,
    dir: &Path,
) -> Result<Vec<(String, PathBuf)>> {
    let whole = mix.whole();
    let range = |i: usize| {
        let s = whole.cov.entries()[(i, i)].sqrt();
        (whole.mean[i] - 3.5 * s, whole.mean[i] + 3.5 * s)
    };
    let grid = RasterGrid {
        x_range: range(axes.0),
        y_range: range(axes.1),
        res,
    };
    let mut centers: Vec<(String, Vec<f64>)> = mix
        .components()
        .iter()
        .enumerate()
        .map(|(k, c)| (format!("raster_region{}.txt", k + 1), c.mean.clone()))
        .collect();
    centers.push(("raster_whole.txt".into(), whole.mean.clone()));
    let mut out = Vec::new();
    for (name, center) in centers {
        let fixed: Vec<(usize, f64)> = (0..mix.dim())
            .filter(|&i| i != axes.0 && i != axes.1)
            .map(|i| (i, center[i]))
            .collect();
        let grid = region_slice_raster(mix, &fixed, &grid)?;
        let mut w = create(dir, &name)?;
        grid.write_to(&mut w)?;
        w.flush()?;
        out.push((name.clone(), dir.join(name)));
    }
    Ok(out)
}
