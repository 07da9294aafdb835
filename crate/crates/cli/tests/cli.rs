use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use evsynth::formats::{read_event_csv, read_evtf};
use evsynth::imaging::Image;
use evsynth::pipeline::{read_manifest, EntryStatus};

fn evsynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evsynth"))
        .args(args)
        .env_remove("EVCAM_WORKERS")
        .env("RUST_LOG", "info")
        .output()
        .expect("spawn evsynth")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_image(path: &Path, img: &Image) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    img.save_png(path).unwrap();
}

fn textured(w: usize, h: usize, k: usize) -> Image {
    Image::from_fn(w, h, 3, |x, y, c| ((x * (3 + k) + y * 7 + c * 11) % 17) as f32 / 16.0).unwrap()
}

#[test]
fn help_lists_every_flag_with_defaults() {
    let snap_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/snapshots");
    let update = std::env::var_os("UPDATE_SNAPSHOTS").is_some();
    for sub in ["", "expose", "events", "dataset", "snn-demo", "fusion-check", "bench"] {
        let args: Vec<&str> = if sub.is_empty() { vec!["--help"] } else { vec![sub, "--help"] };
        let out = evsynth(&args);
        assert_eq!(code(&out), 0);
        let text = String::from_utf8(out.stdout).unwrap();
        let name = if sub.is_empty() { "evsynth" } else { sub };
        let snap = snap_dir.join(format!("{name}.help.txt"));
        if update {
            fs::create_dir_all(&snap_dir).unwrap();
            fs::write(&snap, &text).unwrap();
        }
        let expected = fs::read_to_string(&snap).unwrap_or_else(|_| panic!("missing snapshot {}", snap.display()));
        assert_eq!(text, expected, "help for {name:?} changed; rerun with UPDATE_SNAPSHOTS=1");
    }
    // Every option that takes a value shows its default, except optional
    // output paths and the required dataset roots.
    let no_default = ["--config", "--dump-flow", "--json", "--raster", "--input", "--output"];
    for name in ["expose", "events", "dataset", "snn-demo", "fusion-check", "bench"] {
        let text = fs::read_to_string(snap_dir.join(format!("{name}.help.txt"))).unwrap();
        for line in text.lines().map(str::trim).filter(|l| l.starts_with("--")) {
            let flag = line.split_whitespace().next().unwrap();
            let takes_value = line.split_whitespace().nth(1).is_some_and(|t| t.starts_with('<'));
            if takes_value && !no_default.contains(&flag) {
                assert!(line.contains("[default: "), "{name}: {flag} has no default shown");
            }
        }
    }
    let dataset = fs::read_to_string(snap_dir.join("dataset.help.txt")).unwrap();
    assert!(dataset.contains("[env: EVCAM_WORKERS=]"));
    assert!(dataset.contains("--workers <WORKERS>"));
}

#[test]
fn expose_identity_and_underexposure() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("in.png");
    write_image(&src, &textured(20, 10, 0));
    let same = dir.path().join("same.png");
    let dark = dir.path().join("dark.png");

    assert_eq!(code(&evsynth(&["expose", s(&src), s(&same), "--alpha", "1.0"])), 0);
    let a = Image::load(&src).unwrap();
    let b = Image::load(&same).unwrap();
    let worst = a.data().iter().zip(b.data()).map(|(p, q)| (p - q).abs()).fold(0.0, f32::max);
    assert!(worst <= 1.0 / 255.0 + 1e-6, "alpha=1 moved a sample by {worst}");

    assert_eq!(code(&evsynth(&["expose", s(&src), s(&dark), "--alpha", "0.2"])), 0);
    let d = Image::load(&dark).unwrap();
    let mean = |img: &Image| img.data().iter().sum::<f32>() / img.data().len() as f32;
    assert!(mean(&d) < 0.3 * mean(&a));
}

#[test]
fn expose_bad_alpha_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("in.png");
    write_image(&src, &textured(4, 4, 0));
    for bad in ["-1", "0", "abc"] {
        let out = evsynth(&["expose", s(&src), s(&dir.path().join("o.png")), "--alpha", bad]);
        assert_eq!(code(&out), 64, "alpha {bad}");
        assert!(stderr(&out).contains("--alpha"), "{}", stderr(&out));
    }
    assert!(!dir.path().join("o.png").exists());
}

#[test]
fn events_uniform_image_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("gray.png");
    write_image(&src, &Image::constant(12, 9, 3, 0.5).unwrap());
    let out = dir.path().join("ev");
    let run = evsynth(&["events", s(&src), s(&out), "--emit", "evtf,csv"]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    assert!(read_evtf(out.with_extension("evtf")).unwrap().is_empty());
    assert_eq!(fs::read_to_string(out.with_extension("csv")).unwrap(), "x,y,polarity\n");
}

#[test]
fn events_perpendicular_ramp_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("ramp.png");
    write_image(&src, &Image::from_fn(32, 16, 3, |x, _, _| x as f32 / 31.0).unwrap());
    let out = dir.path().join("ev");
    let base = ["events", s(&src), s(&out), "--flow", "fixed", "--threshold", "0.01"];
    let run = evsynth(&[&base[..], &["--theta", "1.5707963"]].concat());
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    assert!(read_evtf(out.with_extension("evtf")).unwrap().is_empty());

    let run = evsynth(&[&base[..], &["--theta", "0"]].concat());
    assert_eq!(code(&run), 0);
    assert!(read_evtf(out.with_extension("evtf")).unwrap().total_events() > 0);
}

#[test]
fn events_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("in.png");
    write_image(&src, &textured(40, 30, 1));
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    for (out, seed) in [(&a, "9"), (&b, "9"), (&c, "10")] {
        let run = evsynth(&["events", s(&src), s(out), "--seed", seed, "--emit", "evtf,csv,png", "--cap", "3"]);
        assert_eq!(code(&run), 0, "{}", stderr(&run));
    }
    for ext in ["evtf", "csv", "png"] {
        assert_eq!(fs::read(a.with_extension(ext)).unwrap(), fs::read(b.with_extension(ext)).unwrap(), "{ext}");
    }
    assert_ne!(fs::read(a.with_extension("evtf")).unwrap(), fs::read(c.with_extension("evtf")).unwrap());

    let frame = read_evtf(a.with_extension("evtf")).unwrap();
    let rows = read_event_csv(fs::read(a.with_extension("csv")).unwrap().as_slice()).unwrap();
    assert!(frame.total_events() > 0);
    assert_eq!(rows.len() as u64, frame.total_events());
}

#[test]
fn events_dump_flow_writes_png() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("in.png");
    write_image(&src, &textured(8, 6, 0));
    let flow = dir.path().join("flow.png");
    let run = evsynth(&["events", s(&src), s(&dir.path().join("e")), "--dump-flow", s(&flow)]);
    assert_eq!(code(&run), 0);
    let img = Image::load(&flow).unwrap();
    assert_eq!((img.width(), img.height()), (8, 6));
}

#[test]
fn events_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("in.png");
    write_image(&src, &textured(4, 4, 0));
    let out = dir.path().join("e");
    let cases: [(&[&str], &str); 5] = [
        (&["--emit", "tiff"], "--emit"),
        (&["--threshold", "0"], "--threshold"),
        (&["--cap", "0"], "--cap"),
        (&["--flow", "fixed", "--theta", "4"], "--theta"),
        (&["--flow", "sideways"], "--flow"),
    ];
    for (extra, flag) in cases {
        let run = evsynth(&[&["events", s(&src), s(&out)][..], extra].concat());
        assert_eq!(code(&run), 64, "{extra:?}");
        assert!(stderr(&run).contains(flag), "{extra:?}: {}", stderr(&run));
    }
    let run = evsynth(&["events", s(&dir.path().join("missing.png")), s(&out)]);
    assert_eq!(code(&run), 1);
}

#[test]
fn config_file_values_apply_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("in.png");
    write_image(&src, &textured(30, 20, 2));
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# low threshold, many events\nthreshold = 0.02\ncap = 4\nemit = evtf,csv\n").unwrap();

    let from_cfg = dir.path().join("cfg");
    let run = evsynth(&["--config", s(&cfg), "events", s(&src), s(&from_cfg)]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    assert!(stderr(&run).contains("\"threshold_c\":0.02"), "{}", stderr(&run));
    assert!(from_cfg.with_extension("csv").exists());
    let low = read_evtf(from_cfg.with_extension("evtf")).unwrap();

    let overridden = dir.path().join("flag");
    let run = evsynth(&["events", "--config", s(&cfg), s(&src), s(&overridden), "--threshold", "0.5"]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    assert!(stderr(&run).contains("\"threshold_c\":0.5"), "{}", stderr(&run));
    let high = read_evtf(overridden.with_extension("evtf")).unwrap();
    assert!(high.total_events() < low.total_events());

    let run = evsynth(&["--config", s(&dir.path().join("nope.cfg")), "events", s(&src), s(&overridden)]);
    assert_eq!(code(&run), 64);
}

fn voc_root(dir: &Path, n: usize) -> PathBuf {
    let root = dir.join("voc");
    for i in 0..n {
        write_image(&root.join("JPEGImages").join(format!("{i:04}.png")), &textured(24 + i, 20, i));
    }
    root
}

#[test]
fn dataset_two_alphas_per_image() {
    let dir = tempfile::tempdir().unwrap();
    let input = voc_root(dir.path(), 3);
    let output = dir.path().join("out");
    let run = evsynth(&[
        "dataset", "--input", s(&input), "--output", s(&output), "--layout", "voc", "--alphas", "0.2,5.0", "--size", "32",
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let entries = read_manifest(output.join("manifest.jsonl")).unwrap();
    assert_eq!(entries.len(), 6);
    for alpha in [0.2, 5.0] {
        assert_eq!(entries.iter().filter(|e| e.alpha == alpha).count(), 3);
    }
    assert!(entries.iter().all(|e| e.status == EntryStatus::Ok && e.threshold_c == 0.1));
    for e in &entries {
        assert!(output.join(e.out_event.as_ref().unwrap()).exists());
        assert!(output.join(e.out_exposed.as_ref().unwrap()).exists());
    }
}

#[test]
fn dataset_workers_do_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = voc_root(dir.path(), 5);
    let run_with = |name: &str, workers: &str| {
        let output = dir.path().join(name);
        let out = Command::new(env!("CARGO_BIN_EXE_evsynth"))
            .args(["dataset", "--input", s(&input), "--output", s(&output), "--layout", "voc"])
            .args(["--alphas", "0.5,0.2..5", "--size", "40", "--seed", "77"])
            .env("EVCAM_WORKERS", workers)
            .output()
            .unwrap();
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(stderr(&out).contains(&format!("\"workers\":{workers}")), "{}", stderr(&out));
        output
    };
    let one = run_with("w1", "1");
    let three = run_with("w3", "3");
    assert_eq!(fs::read(one.join("manifest.jsonl")).unwrap(), fs::read(three.join("manifest.jsonl")).unwrap());
    for e in read_manifest(one.join("manifest.jsonl")).unwrap() {
        let rel = e.out_event.unwrap();
        assert_eq!(fs::read(one.join(&rel)).unwrap(), fs::read(three.join(&rel)).unwrap(), "{rel}");
    }
}

#[test]
fn dataset_exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    let empty = dir.path().join("empty");
    fs::create_dir_all(&empty).unwrap();
    let out = dir.path().join("o_empty");
    let run = evsynth(&["dataset", "--input", s(&empty), "--output", s(&out)]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    assert!(read_manifest(out.join("manifest.jsonl")).unwrap().is_empty());

    let partial = dir.path().join("partial");
    write_image(&partial.join("good.png"), &textured(10, 10, 0));
    fs::write(partial.join("broken.png"), b"not a png").unwrap();
    let out = dir.path().join("o_partial");
    let run = evsynth(&["dataset", "--input", s(&partial), "--output", s(&out), "--size", "0"]);
    assert_eq!(code(&run), 2, "{}", stderr(&run));
    let entries = read_manifest(out.join("manifest.jsonl")).unwrap();
    assert_eq!(entries.iter().filter(|e| e.status == EntryStatus::Failed).count(), 1);

    let run = evsynth(&["dataset", "--input", s(&partial), "--output", s(&out), "--layout", "voc"]);
    assert_eq!(code(&run), 1, "missing JPEGImages/ is fatal");

    let run = evsynth(&["dataset", "--input", s(&partial), "--output", s(&out), "--alphas", "0.2,0.2"]);
    assert_eq!(code(&run), 64);
    assert!(stderr(&run).contains("--alphas"));
    let run = evsynth(&["dataset", "--input", s(&partial), "--output", s(&out), "--alphas", "-3"]);
    assert_eq!(code(&run), 64);
}

#[test]
fn snn_demo_leak_routing_and_raster() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("in.png");
    write_image(&src, &textured(16, 12, 0));
    let ev = dir.path().join("ev");
    assert_eq!(code(&evsynth(&["events", s(&src), s(&ev), "--threshold", "0.05"])), 0);
    let evtf = ev.with_extension("evtf");

    let stats = |extra: &[&str]| -> serde_json::Value {
        let json = dir.path().join("stats.json");
        let run = evsynth(&[&["snn-demo", s(&evtf), "--json", s(&json)][..], extra].concat());
        assert_eq!(code(&run), 0, "{}", stderr(&run));
        serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap()
    };
    let decay = stats(&[]);
    assert_eq!(decay["time_steps"], 4);
    assert!(decay["leak_factor"].as_f64().unwrap() < 1.0);
    assert_eq!(decay["steps"].as_array().unwrap().len(), 4);
    let literal = stats(&["--paper-literal", "--t", "6"]);
    assert!(literal["leak_factor"].as_f64().unwrap() > 1.0);
    assert_eq!(literal["params"]["leak"], "paper-literal");
    assert_eq!(literal["steps"].as_array().unwrap().len(), 6);
    // A constant 1 input with threshold 1 fires on every step.
    let ones = decay["input_spikes_per_step"].as_u64().unwrap();
    assert!(ones > 0);
    assert!(decay["steps"].as_array().unwrap().iter().all(|s| s["total"].as_u64() == Some(ones)));

    let raster = dir.path().join("raster.png");
    let run = evsynth(&["snn-demo", s(&evtf), "--raster", s(&raster)]);
    assert_eq!(code(&run), 0);
    serde_json::from_slice::<serde_json::Value>(&run.stdout).unwrap();
    assert!(Image::load(&raster).unwrap().width() > 16);

    let run = evsynth(&["snn-demo", s(&evtf), "--tau", "0"]);
    assert_eq!(code(&run), 64);
}

#[test]
fn fusion_check_reports_all_invariants() {
    let run = evsynth(&["fusion-check", "--c", "8", "--t", "4", "--hw", "16", "--trials", "3"]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let report: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(report["all_passed"], true);
    assert_eq!(report["config"]["channels"], 8);
    assert!(report["checks"].as_array().unwrap().len() >= 6);
}

#[test]
fn bench_prints_report() {
    let run = evsynth(&["bench", "--images", "4", "--size", "32", "--workers", "2"]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let report: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(report["config"]["images"], 4);
    assert!(report["images_per_sec"].as_f64().unwrap() > 0.0);
}

#[test]
fn unknown_subcommand_is_usage_error() {
    assert_eq!(code(&evsynth(&["transmogrify"])), 64);
    assert_eq!(code(&evsynth(&[])), 64);
}
