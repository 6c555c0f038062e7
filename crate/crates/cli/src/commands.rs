//! Command implementations.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use log::info;
use shearseg::regularizers::{build_nl_graph, NlOperator};
use shearseg::synthetic::{add_gaussian_noise, synthesize, SyntheticKind, NOISE_GENERATOR};
use shearseg::{
    admm_generic, admm_shearlet, data_term, forward, inverse, AdmmConfig, AdmmResult, Codebook, Coeffs, DataExponent,
    FinestScale, NlParams, PeriodicGradient, Plane, ScaleWeights, System,
};

use crate::codebook::parse_codebook;
use crate::dump::{read_dump, write_dump};
use crate::netpbm::{self, Raster};
use crate::{
    Cli, Command, CompareArgs, ReconstructArgs, Regularizer, SegmentArgs, SynthArgs, SynthKindArg, TransformArgs,
};

pub fn dispatch(cli: &Cli) -> Result<()> {
    let out = &cli.global.output_dir;
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    match &cli.command {
        Command::Transform(a) => transform(a, out),
        Command::Reconstruct(a) => reconstruct(a, out),
        Command::Segment(a) => segment(a, out, cli.global.seed),
        Command::Synth(a) => synth(a, out, cli.global.seed),
        Command::Compare(a) => compare(a, out),
    }
}

/// Index into `0..len` with half-sample symmetric reflection.
fn reflect(i: usize, len: usize) -> usize {
    let m = i % (2 * len);
    if m < len {
        m
    } else {
        2 * len - 1 - m
    }
}

/// Symmetric-pad every channel to a square of side `max(width, height, 4)`.
pub fn pad_square(raster: &Raster) -> (usize, Vec<Vec<f64>>) {
    let (w, h) = (raster.width, raster.height);
    let side = w.max(h).max(shearseg::GridSpec::MIN_SIDE);
    let channels = raster
        .channels
        .iter()
        .map(|ch| {
            let mut out = Vec::with_capacity(side * side);
            for r in 0..side {
                let src = reflect(r, h) * w;
                out.extend((0..side).map(|c| ch[src + reflect(c, w)]));
            }
            out
        })
        .collect();
    (side, channels)
}

/// Top-left `width x height` window of a `side x side` plane.
pub fn crop<T: Copy>(data: &[T], side: usize, width: usize, height: usize) -> Vec<T> {
    (0..height).flat_map(|r| data[r * side..r * side + width].iter().copied()).collect()
}

fn square_planes(raster: &Raster, path: &Path) -> Result<(usize, Vec<Plane>)> {
    let (side, channels) = pad_square(raster);
    if side != raster.width || side != raster.height {
        let msg = format!(
            "{}: {}x{} input padded symmetrically to {side}x{side}",
            path.display(),
            raster.width,
            raster.height
        );
        println!("{msg}");
        info!("{msg}");
    }
    let planes = channels.into_iter().map(|c| Plane::new(side, c)).collect::<shearseg::Result<_>>()?;
    Ok((side, planes))
}

fn transform(a: &TransformArgs, out: &Path) -> Result<()> {
    let raster = netpbm::read(&a.input)?;
    ensure!(
        raster.channels.len() == 1,
        "transform takes a gray image, {} has {} channels",
        a.input.display(),
        raster.channels.len()
    );
    let (side, planes) = square_planes(&raster, &a.input)?;
    let start = Instant::now();
    let system = System::new(side)?;
    let coeffs = forward(&planes[0], &system)?;
    info!("transform of {side}x{side}: {} planes in {:.3} s", system.len(), start.elapsed().as_secs_f64());

    let path = out.join("coefficients.shc");
    let file = fs::File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    write_dump(BufWriter::new(file), system.grid(), system.subbands(), coeffs.as_slice())?;
    println!("wrote {} ({} planes, N = {side})", path.display(), system.len());

    if a.dump_spectra {
        let spectra: Vec<f64> = (0..system.len()).flat_map(|s| system.spectrum(s).iter().copied()).collect();
        let path = out.join("spectra.shc");
        let file = fs::File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        write_dump(BufWriter::new(file), system.grid(), system.subbands(), &spectra)?;
        println!("wrote {}", path.display());
    }

    if !a.no_previews {
        let dir = out.join("previews");
        fs::create_dir_all(&dir)?;
        for (s, sb) in system.subbands().iter().enumerate() {
            let plane = coeffs.plane(s);
            let peak = plane.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let scaled: Vec<f64> =
                if peak > 0.0 { plane.iter().map(|x| x.abs() / peak).collect() } else { vec![0.0; plane.len()] };
            let name = format!("{s:02}_{}_{}_{}.pgm", sb.kind.name(), sb.j, sb.k);
            netpbm::write_gray8(&dir.join(name), side, &scaled)?;
        }
        println!("wrote {} previews to {}", system.len(), dir.display());
    }
    Ok(())
}

fn reconstruct(a: &ReconstructArgs, out: &Path) -> Result<()> {
    let file = fs::File::open(&a.dump).with_context(|| format!("cannot open {}", a.dump.display()))?;
    let dump = read_dump(BufReader::new(file)).with_context(|| format!("corrupt dump {}", a.dump.display()))?;
    let n = dump.grid.side();
    let coeffs = Coeffs::from_planes(dump.grid, FinestScale::default(), dump.subbands, dump.planes)?;
    let system = System::new(n)?;
    let image = inverse(&coeffs, &system)?.into_vec();
    let (w, h) = a.crop.unwrap_or((n, n));
    ensure!(w > 0 && h > 0 && w <= n && h <= n, "crop {w}x{h} does not fit the {n}x{n} reconstruction");
    let raster = Raster::new(w, h, vec![crop(&image, n, w, h)]);
    let path = resolve(out, &a.output);
    let maxval = if a.bits == 16 { u16::MAX } else { 255 };
    netpbm::write(&path, &raster, maxval)?;
    println!("wrote {} ({w}x{h})", path.display());
    Ok(())
}

/// Relative paths land in the output directory.
fn resolve(out: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        out.join(p)
    }
}

/// Default `(gamma, lambda, iterations)` per regularizer.
pub fn defaults(reg: Regularizer) -> (f64, f64, usize) {
    match reg {
        Regularizer::Shearlet => (1.0 / 20.0, 1.0 / 512.0, 10),
        Regularizer::Tv => (1.0 / 4.0, 1.0 / 60.0, 300),
        Regularizer::Nl => (1.0 / 4.0, 1.0 / 60.0, 100),
    }
}

/// Gray level of label `k` out of `q` in a label map.
pub fn label_gray(k: usize, q: usize) -> f64 {
    (255.0 * k as f64 / (q - 1) as f64).round() / 255.0
}

fn require_seed(seed: Option<u64>) -> Result<u64> {
    seed.context("--seed is required when noise is requested")
}

fn segment(a: &SegmentArgs, out: &Path, seed: Option<u64>) -> Result<()> {
    let codebook = parse_codebook(&a.codebook)?;
    let raster = netpbm::read(&a.input)?;
    let (side, mut planes) = square_planes(&raster, &a.input)?;
    let mut log = String::new();
    writeln!(log, "input={}", a.input.display())?;
    writeln!(log, "size={}x{} padded={side}", raster.width, raster.height)?;

    if let Some(sigma) = a.noise {
        ensure!(sigma >= 0.0 && sigma.is_finite(), "--noise must be finite and non-negative");
        let seed = require_seed(seed)?;
        planes = add_gaussian_noise(&planes, sigma, seed)?;
        writeln!(log, "noise={sigma} generator={NOISE_GENERATOR} seed={seed}")?;
    }

    let p = if a.p == 1 { DataExponent::One } else { DataExponent::Two };
    let s = data_term(&planes, &codebook, p)?;
    let (gamma0, lambda0, iters0) = defaults(a.regularizer);
    let mut cfg = AdmmConfig::new(a.gamma.unwrap_or(gamma0), a.iterations.unwrap_or(iters0));
    cfg.tol = a.tol;
    let lambda = a.lambda.clone().unwrap_or_else(|| vec![lambda0]);
    ensure!(!lambda.is_empty(), "--lambda needs at least one value");
    writeln!(
        log,
        "regularizer={:?} gamma={} iterations={} tol={} p={}",
        a.regularizer, cfg.gamma, cfg.max_iters, cfg.tol, a.p
    )?;
    writeln!(log, "codebook={:?}", (0..codebook.labels()).map(|k| codebook.entry(k).to_vec()).collect::<Vec<_>>())?;

    let start = Instant::now();
    let result = match a.regularizer {
        Regularizer::Shearlet => {
            let system = System::new(side)?;
            let scales = system.grid().scales();
            let weights = if lambda.len() == 1 {
                ScaleWeights::uniform(lambda[0], scales)?
            } else {
                ScaleWeights::new(lambda)?.fit(scales)
            };
            writeln!(log, "lambda={:?}", weights.as_slice())?;
            admm_shearlet(&s, &system, &weights, &cfg)?
        }
        Regularizer::Tv | Regularizer::Nl => {
            ensure!(lambda.len() == 1, "{:?} takes a single --lambda value", a.regularizer);
            writeln!(log, "lambda={}", lambda[0])?;
            if a.regularizer == Regularizer::Tv {
                admm_generic(&s, &PeriodicGradient::new(side), lambda[0], &cfg)?
            } else {
                let params =
                    NlParams { patch: a.nl_patch, window: a.nl_window, sigma: a.nl_sigma, neighbors: a.nl_neighbors };
                writeln!(log, "nl={params:?}")?;
                let guide = Plane::new(side, mean_channel(&planes))?;
                let graph = build_nl_graph(&guide, params)?;
                admm_generic(&s, &NlOperator::new(&graph), lambda[0], &cfg)?
            }
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    writeln!(log, "solver_seconds={seconds:.3} iterations_run={}", result.iterations())?;
    println!("{:?}: {} iterations in {seconds:.2} s", a.regularizer, result.iterations());

    write_segmentation(out, &result, &codebook, side, raster.width, raster.height)?;
    fs::write(out.join("segment.log"), log)?;
    Ok(())
}

/// Per-pixel channel mean, the guide image of the non-local graph.
fn mean_channel(planes: &[Plane]) -> Vec<f64> {
    let n = planes[0].as_slice().len();
    let scale = 1.0 / planes.len() as f64;
    (0..n).map(|i| planes.iter().map(|p| p.as_slice()[i]).sum::<f64>() * scale).collect()
}

fn write_segmentation(
    out: &Path,
    result: &AdmmResult<f64>,
    codebook: &Codebook<f64>,
    side: usize,
    w: usize,
    h: usize,
) -> Result<()> {
    let q = codebook.labels();
    let labels = crop(&result.labels(), side, w, h);

    let gray: Vec<f64> = labels.iter().map(|&k| label_gray(k, q)).collect();
    netpbm::write(&out.join("labels.pgm"), &Raster::new(w, h, vec![gray]), 255)?;

    let colour: Vec<Vec<f64>> =
        (0..codebook.channels()).map(|c| labels.iter().map(|&k| codebook.entry(k)[c]).collect()).collect();
    let colour_name = if colour.len() == 3 { "labels_color.ppm" } else { "labels_color.pgm" };
    if colour.len() == 1 || colour.len() == 3 {
        netpbm::write(&out.join(colour_name), &Raster::new(w, h, colour), 255)?;
    } else {
        log::warn!("{}-channel codebook: no colourised map written", colour.len());
    }

    for k in 0..q {
        let mask: Vec<f64> = labels.iter().map(|&l| if l == k { 1.0 } else { 0.0 }).collect();
        netpbm::write(&out.join(format!("mask_{k}.pgm")), &Raster::new(w, h, vec![mask]), 255)?;
    }

    let file = fs::File::create(out.join("convergence.csv"))?;
    shearseg::segmentation::write_log(&result.history, BufWriter::new(file))?;
    println!("wrote labels.pgm, {colour_name}, {q} masks and convergence.csv to {}", out.display());
    Ok(())
}

fn synth(a: &SynthArgs, out: &Path, seed: Option<u64>) -> Result<()> {
    let kind = match a.kind {
        SynthKindArg::Grid => SyntheticKind::Grid,
        SynthKindArg::Cartoon => SyntheticKind::Cartoon,
        SynthKindArg::Stripes => SyntheticKind::Stripes,
    };
    let syn = synthesize::<f64>(kind, a.size)?;
    let n = syn.side();
    let q = syn.codebook.labels();
    let name = kind.name();
    let ext = if syn.channels.len() == 3 { "ppm" } else { "pgm" };
    let clean = Raster::new(n, n, syn.channels.iter().map(|p| p.as_slice().to_vec()).collect());
    netpbm::write(&out.join(format!("{name}.{ext}")), &clean, 255)?;
    let truth = syn.truth.iter().map(|&k| label_gray(k, q)).collect();
    netpbm::write(&out.join(format!("{name}_truth.pgm")), &Raster::new(n, n, vec![truth]), 255)?;

    let mut codebook = String::new();
    for k in 0..q {
        let row: Vec<String> = syn.codebook.entry(k).iter().map(|x| format!("{x}")).collect();
        writeln!(codebook, "{}", row.join(","))?;
    }
    fs::write(out.join(format!("{name}_codebook.txt")), codebook)?;

    let mut log = format!("kind={name}\nsize={n}\nlabels={q}\n");
    if let Some(sigma) = a.noise {
        ensure!(sigma >= 0.0 && sigma.is_finite(), "--noise must be finite and non-negative");
        let seed = require_seed(seed)?;
        let noisy = add_gaussian_noise(&syn.channels, sigma, seed)?;
        let noisy = Raster::new(n, n, noisy.into_iter().map(Plane::into_vec).collect());
        netpbm::write(&out.join(format!("{name}_noisy.pfm")), &noisy, 255)?;
        netpbm::write(&out.join(format!("{name}_noisy.{ext}")), &noisy, 255)?;
        writeln!(log, "noise={sigma}\ngenerator={NOISE_GENERATOR}\nseed={seed}")?;
    }
    fs::write(out.join(format!("{name}.log")), log)?;
    println!("wrote {name} ({n}x{n}, {q} labels) to {}", out.display());
    Ok(())
}

/// Gray levels of a label map as integers at the file's bit depth.
fn read_label_map(path: &Path) -> Result<Raster> {
    let r = netpbm::read(path)?;
    ensure!(r.channels.len() == 1, "{} is not a gray label map", path.display());
    Ok(r)
}

fn levels(r: &Raster) -> Vec<i64> {
    let m = f64::from(r.maxval.unwrap_or(255));
    r.channels[0].iter().map(|x| (x * m).round() as i64).collect()
}

fn compare(a: &CompareArgs, out: &Path) -> Result<()> {
    let truth = read_label_map(&a.truth)?;
    let expected = levels(&truth);
    let mut table = String::from("map\tmislabel_rate\twrong\tpixels\n");
    for path in &a.maps {
        let map = read_label_map(path)?;
        if (map.width, map.height) != (truth.width, truth.height) {
            bail!(
                "{} is {}x{} but the truth is {}x{}",
                path.display(),
                map.width,
                map.height,
                truth.width,
                truth.height
            );
        }
        let got = levels(&map);
        let ok: Vec<f64> = got.iter().zip(&expected).map(|(g, e)| if g == e { 1.0 } else { 0.0 }).collect();
        let wrong = ok.iter().filter(|&&x| x == 0.0).count();
        let rate = wrong as f64 / ok.len() as f64;
        writeln!(table, "{}\t{rate:.6}\t{wrong}\t{}", path.display(), ok.len())?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("map");
        netpbm::write(&out.join(format!("diff_{stem}.pgm")), &Raster::new(map.width, map.height, vec![ok]), 255)?;
    }
    print!("{table}");
    fs::write(out.join("compare.tsv"), table)?;
    Ok(())
}
