use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hcas::cli::restore_stream;
use hcas::io::{load_image, save_image};
use hcas::weights::save_weights;
use hcas_core::{acquire, AcquisitionConfig, BinMode, DrcasModel, Image, JpegStream};

fn hcas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcas")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus").join(name)
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn acquire_writes_stream_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.jpg");
    let o =
        hcas(&["acquire", s(&corpus("chelsea.png")), s(&out), "--bin", "2x2", "--truncate", "1", "--quality", "90"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let bytes = std::fs::read(&out).unwrap();
    assert_eq!(&bytes[..2], &[0xFF, 0xD8]);
    let meta = std::fs::read_to_string(dir.path().join("out.jpg.meta")).unwrap();
    assert_eq!(meta, "bin=2x2\ntruncate=1\nquality=90\n");

    // Same bytes as the library call, and stable across runs.
    let cfg = AcquisitionConfig::new(BinMode::Bin2x2, 1, 90).unwrap();
    let lib = acquire(&load_image(corpus("chelsea.png")).unwrap(), &cfg).unwrap();
    assert_eq!(bytes, lib.as_bytes());
    let again = dir.path().join("again.jpg");
    hcas(&["acquire", s(&corpus("chelsea.png")), s(&again), "--bin", "2x2", "--truncate", "1", "--quality", "90"]);
    assert_eq!(std::fs::read(&again).unwrap(), bytes);
}

#[test]
fn acquire_flag_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.jpg");
    let input = corpus("coffee.png");
    for bad in [
        ["--bin", "2x2", "--truncate", "4", "--quality", "90"],
        ["--bin", "3x3", "--truncate", "1", "--quality", "90"],
        ["--bin", "2x2", "--truncate", "1", "--quality", "69"],
    ] {
        let mut args = vec!["acquire", s(&input), s(&out)];
        args.extend(bad);
        let o = hcas(&args);
        assert_eq!(code(&o), 2, "{bad:?}");
        assert!(!stderr(&o).is_empty());
        assert!(!out.exists());
    }
    let o = hcas(&["acquire", s(&input), s(&out), "--bin", "2x2", "--quality", "90"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn acquire_io_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.jpg");
    let o = hcas(&[
        "acquire",
        s(&dir.path().join("none.png")),
        s(&out),
        "--bin",
        "2x2",
        "--truncate",
        "1",
        "--quality",
        "90",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).starts_with("error:"));
    let bad = dir.path().join("bad.ppm");
    std::fs::write(&bad, b"P6\n4 4\n255\n\x00").unwrap();
    let o = hcas(&["acquire", s(&bad), s(&out), "--bin", "2x2", "--truncate", "1", "--quality", "90"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("unexpected end of file"));
}

#[test]
fn bicubic_restore_of_lossless_constant_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("c.png");
    let img = Image::filled(24, 16, 3, 8, 93).unwrap();
    save_image(&img, &src).unwrap();
    let jpg = dir.path().join("c.jpg");
    let o = hcas(&["acquire", s(&src), s(&jpg), "--bin", "1x1", "--truncate", "0", "--quality", "100"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let png = dir.path().join("r.png");
    let o = hcas(&["restore", s(&jpg), s(&png), "--method", "bicubic"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(load_image(&png).unwrap(), img);
}

fn acquired(dir: &Path, bin: &str, n: &str) -> PathBuf {
    let jpg = dir.join(format!("a_{bin}.jpg"));
    let o = hcas(&["acquire", s(&corpus("rocket.png")), s(&jpg), "--bin", bin, "--truncate", n, "--quality", "80"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    jpg
}

#[test]
fn zero_model_restore_matches_bicubic_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for (bin, (sx, sy)) in [("2x1", (2, 1)), ("4x4", (4, 4))] {
        let jpg = acquired(dir.path(), bin, "2");
        let w = dir.path().join(format!("zero_{bin}.drcs"));
        save_weights(&DrcasModel::zeros(sx, sy, 8, 2), &w).unwrap();
        let bic = dir.path().join("b.png");
        let net = dir.path().join("n.png");
        assert_eq!(code(&hcas(&["restore", s(&jpg), s(&bic)])), 0);
        let o = hcas(&["restore", s(&jpg), s(&net), "--method", "drcas", "--weights", s(&w)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert_eq!(std::fs::read(&bic).unwrap(), std::fs::read(&net).unwrap());

        // The CLI output equals the library receiver chain.
        let bin_mode: BinMode = bin.parse().unwrap();
        let stream = JpegStream::from_bytes(std::fs::read(&jpg).unwrap());
        assert_eq!(load_image(&bic).unwrap(), restore_stream(&stream, bin_mode, 2, None).unwrap());
    }
}

#[test]
fn restore_usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let jpg = acquired(dir.path(), "2x2", "1");
    let out = dir.path().join("o.png");

    let o = hcas(&["restore", s(&jpg), s(&out), "--method", "drcas"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--weights"));

    let w = dir.path().join("m.drcs");
    save_weights(&DrcasModel::zeros(4, 4, 4, 1), &w).unwrap();
    let o = hcas(&["restore", s(&jpg), s(&out), "--method", "drcas", "--weights", s(&w)]);
    assert_eq!(code(&o), 2);
    let msg = stderr(&o);
    assert!(msg.contains("scale mismatch") && msg.contains("4x4") && msg.contains("2x2"), "{msg}");

    let o = hcas(&["restore", s(&jpg), s(&out), "--weights", s(&w)]);
    assert_eq!(code(&o), 2);

    let bare = dir.path().join("bare.jpg");
    std::fs::copy(&jpg, &bare).unwrap();
    let o = hcas(&["restore", s(&bare), s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains(".meta"));
    // Flags stand in for the missing sidecar.
    let o = hcas(&["restore", s(&bare), s(&out), "--bin", "2x2", "--truncate", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(out.exists());
}

#[test]
fn restore_runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let jpg = acquired(dir.path(), "2x2", "1");
    let out = dir.path().join("o.png");
    let w = dir.path().join("bad.drcs");
    std::fs::write(&w, b"XXXX").unwrap();
    let o = hcas(&["restore", s(&jpg), s(&out), "--method", "drcas", "--weights", s(&w)]);
    assert_eq!(code(&o), 1);
    let broken = dir.path().join("broken.jpg");
    std::fs::write(&broken, b"not a jpeg").unwrap();
    std::fs::copy(dir.path().join("a_2x2.jpg.meta"), dir.path().join("broken.jpg.meta")).unwrap();
    let o = hcas(&["restore", s(&broken), s(&out)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn eval_prints_psnr() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str, img: &Image| {
        let path = dir.path().join(name);
        save_image(img, &path).unwrap();
        path
    };
    let black = p("black.png", &Image::filled(2, 2, 1, 8, 0).unwrap());
    let white = p("white.png", &Image::filled(2, 2, 1, 8, 255).unwrap());
    let one_off = p("one.png", &Image::new(2, 2, 1, 8, vec![16, 0, 0, 0]).unwrap());
    let run = |a: &Path, b: &Path| {
        let o = hcas(&["eval", "--ref", s(a), "--test", s(b)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        stdout(&o).trim().to_string()
    };
    assert_eq!(run(&black, &black), "inf");
    assert_eq!(run(&black, &white), "0.00");
    assert_eq!(run(&black, &one_off), "30.07");
    let rgb = p("rgb.png", &Image::filled(3, 2, 3, 8, 0).unwrap());
    assert_eq!(code(&hcas(&["eval", "--ref", s(&black), "--test", s(&rgb)])), 1);
}

#[test]
fn rawcomp_report() {
    let o = hcas(&["analyze", "--mode", "rawcomp"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 12);
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    let width = header.split(',').count();
    assert_eq!(width, 17);
    let expect = [
        ("2x1", "0", "0.5"),
        ("2x1", "3", "0.6875"),
        ("2x2", "0", "0.75"),
        ("2x2", "1", "0.78125"),
        ("4x4", "3", "0.9609375"),
    ];
    for row in &rows {
        assert_eq!(row.split(',').count(), width, "{row}");
    }
    for (bin, n, frac) in expect {
        assert!(
            rows.iter().any(|r| {
                let f: Vec<_> = r.split(',').collect();
                f[0] == bin && f[1] == n && f[7] == frac
            }),
            "{bin} {n}"
        );
    }
}

#[test]
fn switching_on_constant_dataset_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d");
    std::fs::create_dir(&data).unwrap();
    save_image(&Image::filled(8, 6, 3, 8, 77).unwrap(), data.join("k.png")).unwrap();
    let csv = dir.path().join("r.csv");
    let o = hcas(&["analyze", "--mode", "switching", "--dataset", s(&data), "--out", s(&csv)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 1);
    let f: Vec<_> = rows[0].split(',').collect();
    assert_eq!(f.len(), 17);
    assert_eq!(f[4], "1");
    assert!(f[9..].iter().all(|v| *v == "0.000000"), "{}", rows[0]);
}

#[test]
fn analyze_missing_dataset_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    for mode in ["switching", "size", "table1"] {
        let o = hcas(&["analyze", "--mode", mode, "--dataset", s(&dir.path().join("absent"))]);
        assert_eq!(code(&o), 1, "{mode}");
    }
    let o = hcas(&["analyze", "--mode", "table1"]);
    assert_eq!(code(&o), 2);
}

fn one_image_dataset(dir: &Path) -> PathBuf {
    let data = dir.join("data");
    std::fs::create_dir(&data).unwrap();
    std::fs::copy(corpus("astronaut.png"), data.join("astronaut.png")).unwrap();
    data
}

#[test]
fn one_section_pipeline_equals_single_commands() {
    let dir = tempfile::tempdir().unwrap();
    let data = one_image_dataset(dir.path());
    let cfg = dir.path().join("p.cfg");
    let csv = dir.path().join("p.csv");
    std::fs::write(
        &cfg,
        format!("dataset = {}\nout = {}\n\n[only]\nbin = 2x2\ntruncate = 2\nquality = 80\n", s(&data), s(&csv)),
    )
    .unwrap();
    let o = hcas(&["pipeline", "--config", s(&cfg)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let piped = std::fs::read_to_string(&csv).unwrap();

    let o = hcas(&[
        "analyze",
        "--mode",
        "table1",
        "--dataset",
        s(&data),
        "--bin",
        "2x2",
        "--truncate",
        "2",
        "--quality",
        "80",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let direct = stdout(&o);
    assert_eq!(data_rows(&piped), data_rows(&direct));
    let row: Vec<_> = data_rows(&piped)[0].split(',').map(str::to_string).collect();
    assert_eq!(&row[..5], ["2x2", "2", "80", "bicubic", "1"]);

    // acquire + restore + eval reproduce the reported bicubic PSNR.
    let jpg = dir.path().join("x.jpg");
    let png = dir.path().join("x.png");
    let src = data.join("astronaut.png");
    assert_eq!(code(&hcas(&["acquire", s(&src), s(&jpg), "--bin", "2x2", "--truncate", "2", "--quality", "80"])), 0);
    assert_eq!(code(&hcas(&["restore", s(&jpg), s(&png)])), 0);
    let o = hcas(&["eval", "--ref", s(&src), "--test", s(&png)]);
    let single: f64 = stdout(&o).trim().parse().unwrap();
    let reported: f64 = row[6].parse().unwrap();
    assert!((single - reported).abs() <= 0.005, "{single} vs {reported}");
}

#[test]
fn pipeline_rows_follow_file_order() {
    let dir = tempfile::tempdir().unwrap();
    let data = one_image_dataset(dir.path());
    let cfg = dir.path().join("p.cfg");
    std::fs::write(
        &cfg,
        format!(
            "dataset = {}\n[b]\nbin = 4x4\ntruncate = 0\nquality = 70\n[a]\nbin = 2x1\ntruncate = 3\nquality = 100\n",
            s(&data)
        ),
    )
    .unwrap();
    let o = hcas(&["pipeline", "--config", s(&cfg)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let rows = data_rows(&text);
    assert!(rows[0].starts_with("4x4,0,70,") && rows[1].starts_with("2x1,3,100,"), "{rows:?}");
}

#[test]
fn pipeline_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.cfg");
    std::fs::write(&cfg, "").unwrap();
    assert_eq!(code(&hcas(&["pipeline", "--config", s(&cfg)])), 2);
    std::fs::write(&cfg, "[a]\nbin = 2x2\ntruncate = 1\nquality = 90\n").unwrap();
    assert_eq!(code(&hcas(&["pipeline", "--config", s(&cfg)])), 2);
    assert_eq!(code(&hcas(&["pipeline", "--config", s(&dir.path().join("none.cfg"))])), 1);
    assert_eq!(code(&hcas(&["pipeline"])), 2);
}

#[test]
fn emitted_grid_has_48_sections() {
    let o = hcas(&["pipeline", "--emit-grid", "--dataset", "/data/valid"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with('[')).count(), 48);
    assert_eq!(hcas::pipeline::parse_pipeline(&text).unwrap().entries.len(), 48);
}

#[test]
fn no_subcommand_is_usage() {
    assert_eq!(code(&hcas(&[])), 2);
    assert_eq!(code(&hcas(&["frobnicate"])), 2);
    assert_eq!(code(&hcas(&["--version"])), 0);
}
