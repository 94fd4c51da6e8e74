//! Acceptance checks, one verdict line per criterion.
//!
//! Runs without the libtest harness so the verdicts always reach the
//! terminal. Criteria that need DIV2K read `HCAS_DIV2K_DIR` (a directory
//! holding `0701.png` .. `0800.png`); `HCAS_DIV2K_SUBSET=1` switches to the
//! documented subsets (first 20 images for switching activity, first 10 for
//! PSNR) with their wider tolerances. Dataset criteria are reported but only
//! affect the exit status when `HCAS_ACCEPTANCE_STRICT=1`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use hcas::eval::{eval_configs, switching_dataset, AlphaSource, EvalJob, EvalOptions};
use hcas::io::load_image;
use hcas::weights::{decode_weights, encode_weights};
use hcas_core::jpeg::{fdct8x8, idct8x8};
use hcas_core::restoration::{conv2d, ConvLayer, Tensor};
use hcas_core::{
    acquire, bicubic_upscale, drcas_forward, jpeg_decode, jpeg_encode, psnr, raw_compression, restore_brightness,
    truncate_bits, AcquisitionConfig, BinMode, DrcasModel, Image, JpegStream,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RAW_COMPRESSION_HUNDREDTHS: [(BinMode, [u32; 4]); 3] = [
    (BinMode::Bin2x1, [5000, 5625, 6250, 6875]),
    (BinMode::Bin2x2, [7500, 7812, 8125, 8437]),
    (BinMode::Bin4x4, [9375, 9453, 9531, 9609]),
];
const PUBLISHED_ALPHA: [f64; 8] = [0.48, 0.46, 0.41, 0.33, 0.25, 0.17, 0.09, 0.04];
const ALPHA_TOL_FULL: f64 = 0.03;
const ALPHA_TOL_SUBSET: f64 = 0.05;
const ALPHA_SUBSET: usize = 20;
const BICUBIC_2X2_DB: f64 = 30.97;
const BICUBIC_2X1_DB: f64 = 33.19;
const PSNR_TOL_FULL: f64 = 0.7;
const PSNR_TOL_SUBSET: f64 = 1.0;
const PSNR_SUBSET: usize = 10;
const QUALITIES: [u8; 4] = [70, 80, 90, 100];
const FIXTURE_MAX_DEV: u8 = 1;
const DCT_TOL: f64 = 1e-6;
const DCT_CASES: usize = 2000;
const CONV_TOL: f64 = 1e-5;
const CONV_CASES: usize = 1000;
const DEFAULT_PARAMS: usize = 446_659;

enum Verdict {
    Pass(String),
    Fail(String),
}

use Verdict::{Fail, Pass};

/// Name, needs the dataset, check.
type Criterion = (&'static str, bool, fn() -> Verdict);

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn corpus() -> Vec<(String, Image)> {
    let mut files: Vec<_> = std::fs::read_dir(fixtures().join("corpus")).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files.iter().map(|p| (p.file_stem().unwrap().to_string_lossy().into_owned(), load_image(p).unwrap())).collect()
}

fn fmt8(v: &[f64; 8]) -> String {
    let parts: Vec<_> = v.iter().map(|a| format!("{a:.3}")).collect();
    format!("[{}]", parts.join(" "))
}

fn raw_compression_exact() -> Verdict {
    let mut bad = Vec::new();
    for (bin, row) in RAW_COMPRESSION_HUNDREDTHS {
        for (i, want) in row.into_iter().enumerate() {
            let bw = 8 - i as u8;
            let got = raw_compression(bin.pixels(), bw).unwrap().percent_hundredths();
            if got != want {
                bad.push(format!("{bin} at {bw} bits: {got} vs {want}"));
            }
        }
    }
    check(bad.is_empty(), if bad.is_empty() { "12/12 entries exact".into() } else { bad.join("; ") })
}

struct Div2k {
    dir: PathBuf,
    subset: bool,
}

fn div2k() -> Result<Div2k, String> {
    let dir = std::env::var_os("HCAS_DIV2K_DIR")
        .map(PathBuf::from)
        .ok_or("DIV2K not available in this environment (HCAS_DIV2K_DIR unset)")?;
    let subset = std::env::var("HCAS_DIV2K_SUBSET").is_ok_and(|v| v == "1");
    Ok(Div2k { dir, subset })
}

/// Stages the first `count` of 0701..0800 into a temporary directory.
fn stage_test_images(d: &Div2k, count: usize) -> Result<tempfile::TempDir, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    for id in (701..=800).take(count) {
        let src = d.dir.join(format!("{id:04}.png"));
        if !src.is_file() {
            return Err(format!("{} missing", src.display()));
        }
        std::os::unix::fs::symlink(&src, tmp.path().join(format!("{id:04}.png"))).map_err(|e| e.to_string())?;
    }
    Ok(tmp)
}

fn proxy_alpha() -> String {
    let mut counts = hcas_core::SwitchingCounts::default();
    for (_, img) in corpus() {
        counts.add_image(&img);
    }
    format!(
        "proxy corpus: alpha={} toggle_rate={}",
        fmt8(&counts.alpha().unwrap()),
        fmt8(&counts.toggle_rate().unwrap())
    )
}

fn switching_activity() -> Verdict {
    let d = match div2k() {
        Ok(d) => d,
        Err(e) => return Fail(format!("{e}; {}", proxy_alpha())),
    };
    let (count, tol) = if d.subset { (ALPHA_SUBSET, ALPHA_TOL_SUBSET) } else { (100, ALPHA_TOL_FULL) };
    let staged = match stage_test_images(&d, count) {
        Ok(t) => t,
        Err(e) => return Fail(e),
    };
    let opts = EvalOptions { workers: None, limit: None, alpha_source: AlphaSource::Original };
    let (n, counts) = match switching_dataset(staged.path(), None, &opts) {
        Ok(r) => r,
        Err(e) => return Fail(e.to_string()),
    };
    let alpha = counts.alpha().unwrap();
    let worst = alpha.iter().zip(PUBLISHED_ALPHA).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    check(
        worst <= tol,
        format!(
            "{n} images: alpha={} max|diff|={worst:.3} (tol {tol}); toggle_rate={}",
            fmt8(&alpha),
            fmt8(&counts.toggle_rate().unwrap())
        ),
    )
}

fn bicubic_means(dataset: &Path) -> Result<(usize, f64, f64), String> {
    let jobs: Vec<EvalJob<'_>> = [BinMode::Bin2x2, BinMode::Bin2x1]
        .into_iter()
        .map(|b| EvalJob { config: AcquisitionConfig::new(b, 0, 100).unwrap(), model: None })
        .collect();
    let opts = EvalOptions { workers: None, limit: None, alpha_source: AlphaSource::Original };
    let r = eval_configs(dataset, &jobs, &opts).map_err(|e| e.to_string())?;
    Ok((r[0].images, r[0].psnr_bicubic, r[1].psnr_bicubic))
}

fn bicubic_psnr() -> Verdict {
    let d = match div2k() {
        Ok(d) => d,
        Err(e) => {
            let proxy = bicubic_means(&fixtures().join("corpus"))
                .map(|(n, a, b)| format!("proxy corpus ({n} crops): 2x2 {a:.2} dB, 2x1 {b:.2} dB"))
                .unwrap_or_else(|e| e);
            return Fail(format!("{e}; {proxy}"));
        }
    };
    let (count, tol) = if d.subset { (PSNR_SUBSET, PSNR_TOL_SUBSET) } else { (100, PSNR_TOL_FULL) };
    let staged = match stage_test_images(&d, count) {
        Ok(t) => t,
        Err(e) => return Fail(e),
    };
    match bicubic_means(staged.path()) {
        Ok((n, a, b)) => check(
            (a - BICUBIC_2X2_DB).abs() <= tol && (b - BICUBIC_2X1_DB).abs() <= tol,
            format!("{n} images: 2x2 {a:.2} dB (target {BICUBIC_2X2_DB}), 2x1 {b:.2} dB (target {BICUBIC_2X1_DB}), tol {tol}"),
        ),
        Err(e) => Fail(e),
    }
}

fn fixture_deviation(name: &str) -> u8 {
    let dir = fixtures().join("jpeg");
    let bytes = std::fs::read(dir.join(format!("{name}.jpg"))).unwrap();
    let got = jpeg_decode(&JpegStream::from_bytes(bytes)).unwrap();
    let ext = if name.starts_with("gray") { "pgm" } else { "ppm" };
    let want = load_image(dir.join(format!("{name}.{ext}"))).unwrap();
    assert!(got.same_shape(&want));
    got.samples().iter().zip(want.samples()).map(|(a, b)| a.abs_diff(*b)).max().unwrap()
}

fn codec() -> Verdict {
    let mut problems = Vec::new();
    for (name, img) in corpus() {
        let mut prev: Option<(f64, usize)> = None;
        for q in QUALITIES {
            let s = jpeg_encode(&img, q).unwrap();
            let db = psnr(&img, &jpeg_decode(&s).unwrap()).unwrap();
            if let Some((pdb, plen)) = prev {
                if db < pdb || s.len() < plen {
                    problems.push(format!("{name} Q{q}: {db:.2} dB/{} B after {pdb:.2} dB/{plen} B", s.len()));
                }
            }
            prev = Some((db, s.len()));
        }
    }
    for channels in [1, 3] {
        let block = Image::filled(8, 8, channels, 8, 128).unwrap();
        for q in 70..=100 {
            if jpeg_decode(&jpeg_encode(&block, q).unwrap()).unwrap() != block {
                problems.push(format!("constant 128 block ({channels} ch) lossy at Q{q}"));
            }
        }
    }
    let names = ["rgb444_q90", "rgb420_q75", "rgb422_q85", "gray_q80", "rgb420_restart_q95", "rgb444_optimized_q70"];
    let worst = names.iter().map(|n| fixture_deviation(n)).max().unwrap();
    if worst > FIXTURE_MAX_DEV {
        problems.push(format!("fixture deviation {worst}"));
    }
    check(
        problems.is_empty(),
        if problems.is_empty() {
            format!("monotone over Q{QUALITIES:?} on 4 images; 8x8 of 128 lossless at Q70..=100; 6 fixtures, max dev {worst}")
        } else {
            problems.join("; ")
        },
    )
}

fn c(k: usize) -> f64 {
    if k == 0 {
        std::f64::consts::FRAC_1_SQRT_2
    } else {
        1.0
    }
}

fn cosine(pos: usize, freq: usize) -> f64 {
    (((2 * pos + 1) * freq) as f64 * std::f64::consts::PI / 16.0).cos()
}

fn fdct_oracle(f: &[f64; 64]) -> [f64; 64] {
    std::array::from_fn(|i| {
        let (v, u) = (i / 8, i % 8);
        let mut s = 0.0;
        for y in 0..8 {
            for x in 0..8 {
                s += f[y * 8 + x] * cosine(x, u) * cosine(y, v);
            }
        }
        c(u) * c(v) / 4.0 * s
    })
}

fn idct_oracle(coef: &[f64; 64]) -> [f64; 64] {
    std::array::from_fn(|i| {
        let (y, x) = (i / 8, i % 8);
        let mut s = 0.0;
        for v in 0..8 {
            for u in 0..8 {
                s += c(u) * c(v) * coef[v * 8 + u] * cosine(x, u) * cosine(y, v);
            }
        }
        s / 4.0
    })
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn conv_oracle(x: &Tensor, l: &ConvLayer) -> Vec<f64> {
    let (h, w) = (x.height() as isize, x.width() as isize);
    let (ph, pw) = ((l.kernel_h / 2) as isize, (l.kernel_w / 2) as isize);
    let mut out = Vec::new();
    for o in 0..l.out_channels {
        for y in 0..h {
            for xx in 0..w {
                let mut s = f64::from(l.bias[o]);
                for i in 0..l.in_channels {
                    for ky in 0..l.kernel_h {
                        for kx in 0..l.kernel_w {
                            let (sy, sx) = (y + ky as isize - ph, xx + kx as isize - pw);
                            if sy < 0 || sx < 0 || sy >= h || sx >= w {
                                continue;
                            }
                            let wv = l.weights[((o * l.in_channels + i) * l.kernel_h + ky) * l.kernel_w + kx];
                            s += f64::from(wv) * f64::from(x.at(i, sy as usize, sx as usize));
                        }
                    }
                }
                out.push(s);
            }
        }
    }
    out
}

fn kernels() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut fwd, mut inv, mut rt) = (0.0f64, 0.0f64, 0.0f64);
    for case in 0..DCT_CASES {
        let block: [f64; 64] = std::array::from_fn(|_| {
            if case % 2 == 0 {
                f64::from(rng.random_range(-128i32..=127))
            } else {
                rng.random_range(-128.0..128.0)
            }
        });
        let coef = fdct8x8(&block);
        fwd = fwd.max(max_diff(&coef, &fdct_oracle(&block)));
        inv = inv.max(max_diff(&idct8x8(&coef), &idct_oracle(&coef)));
        rt = rt.max(max_diff(&idct8x8(&coef), &block));
    }
    let mut conv = 0.0f64;
    for _ in 0..CONV_CASES {
        let (ci, co) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let k = [1, 3, 5][rng.random_range(0..3)];
        let (h, w) = (rng.random_range(1..=9), rng.random_range(1..=9));
        let mut layer = ConvLayer::zeros(co, ci, k);
        layer.weights.iter_mut().chain(layer.bias.iter_mut()).for_each(|v| *v = rng.random_range(-1.0..1.0));
        let x = Tensor::from_vec(ci, h, w, (0..ci * h * w).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let got: Vec<f64> = conv2d(&x, &layer).unwrap().data().iter().map(|&v| f64::from(v)).collect();
        conv = conv.max(max_diff(&got, &conv_oracle(&x, &layer)));
    }
    check(
        fwd <= DCT_TOL && inv <= DCT_TOL && rt <= DCT_TOL && conv <= CONV_TOL,
        format!(
            "{DCT_CASES} blocks: fdct {fwd:.1e}, idct {inv:.1e}, round trip {rt:.1e} (tol {DCT_TOL:.0e}); \
             {CONV_CASES} conv2d cases: {conv:.1e} (tol {CONV_TOL:.0e})"
        ),
    )
}

fn zero_model() -> Verdict {
    let (_, img) = corpus().into_iter().next().unwrap();
    let mut bad = Vec::new();
    for bin in [BinMode::None, BinMode::Bin2x1, BinMode::Bin2x2, BinMode::Bin4x4] {
        let cfg = AcquisitionConfig::new(bin, 1, 90).unwrap();
        let lr = restore_brightness(&jpeg_decode(&acquire(&img, &cfg).unwrap()).unwrap(), 1).unwrap();
        let (sx, sy) = bin.factors();
        let bytes =
            encode_weights(&DrcasModel::zeros(sx, sy, DrcasModel::DEFAULT_CHANNELS, DrcasModel::DEFAULT_BLOCKS));
        let model = decode_weights(&bytes).unwrap();
        if drcas_forward(&lr, &model, sx, sy).unwrap() != bicubic_upscale(&lr, sx, sy).unwrap() {
            bad.push(format!("{bin} differs"));
        }
    }
    check(bad.is_empty(), if bad.is_empty() { "1x1, 2x1, 2x2, 4x4 byte-identical".into() } else { bad.join("; ") })
}

fn param_count() -> Verdict {
    let m = DrcasModel::default_for_scale(2, 2);
    let via_file = decode_weights(&encode_weights(&m)).unwrap().param_count();
    check(
        m.param_count() == DEFAULT_PARAMS && via_file == DEFAULT_PARAMS,
        format!("{} (via DRCS file {via_file}), expected {DEFAULT_PARAMS}", m.param_count()),
    )
}

fn truncation() -> Verdict {
    let ramp = Image::new(256, 1, 1, 8, (0..=255).collect()).unwrap();
    let mut worst = [0u8; 4];
    for n in 0..=3u8 {
        let back = restore_brightness(&truncate_bits(&ramp, n).unwrap(), n).unwrap();
        worst[n as usize] = ramp.samples().iter().zip(back.samples()).map(|(a, b)| a.abs_diff(*b)).max().unwrap();
    }
    let ok = worst[0] == 0 && (1..=3).all(|n| worst[n] < 1 << n);
    check(ok, format!("max |error| for N=0..3: {worst:?}, bounds [0, 1, 3, 7]"))
}

fn main() -> ExitCode {
    let strict = std::env::var("HCAS_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let criteria: [Criterion; 8] = [
        ("raw compression exact", false, raw_compression_exact),
        ("switching activity vs published values", true, switching_activity),
        ("bicubic PSNR column", true, bicubic_psnr),
        ("codec properties", false, codec),
        ("numerical kernels vs oracles", false, kernels),
        ("zero-model identity", false, zero_model),
        ("default parameter count", false, param_count),
        ("truncation error bound", false, truncation),
    ];
    let mut hard_failures = 0;
    let mut failures = 0;
    for (name, dataset, f) in criteria {
        let t = Instant::now();
        let v = f();
        let secs = t.elapsed().as_secs_f64();
        match v {
            Pass(d) => println!("PASS  {name}: {d} [{secs:.1}s]"),
            Fail(d) => {
                println!("FAIL  {name}: {d} [{secs:.1}s]");
                failures += 1;
                if !dataset || strict {
                    hard_failures += 1;
                }
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", 8 - failures);
    if hard_failures > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
