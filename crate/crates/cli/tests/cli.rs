#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use siftsvc_core::detect::pyramid_gradients;
use siftsvc_core::features::assign_orientations;
use siftsvc_core::keyfile::KeypointFile;
use siftsvc_core::scale_space::{build_dog_pyramid, build_gaussian_pyramid, refine_extremum};
use siftsvc_core::{save_pgm, RasterImage, SiftConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_siftsvc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write_image(dir: &Path, name: &str, image: &RasterImage) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, save_pgm(image)).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn uniform_image_gives_empty_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_image(
        dir.path(),
        "gray.pgm",
        &RasterImage::from_fn(64, 64, |_, _| 0.5),
    );
    let out = run(&["detect", s(&path), "--format", "json"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(r#"{"keypoints":[],"#), "{text}");
}

#[test]
fn lowe_format_round_trips_and_matches_oracle_count() {
    let dir = tempfile::tempdir().unwrap();
    let (img, _) = common::blob_grid();
    let path = write_image(dir.path(), "blobs.pgm", &img);
    let out = run(&["detect", s(&path), "--format", "lowe"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let file = KeypointFile::parse(&text).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        format!("{} 128", file.records.len())
    );

    // Count from an independent candidate scan pushed through the same filters.
    let config = SiftConfig::default();
    let reloaded = siftsvc_core::load_image(&std::fs::read(&path).unwrap()).unwrap();
    let gp = build_gaussian_pyramid(&reloaded, &config.scale_space).unwrap();
    let dog = build_dog_pyramid(&gp);
    let gradients = pyramid_gradients(&gp);
    let mut refined: Vec<_> = common::brute_force_extrema(&dog, &config.scale_space)
        .iter()
        .filter_map(|e| refine_extremum(&dog, e, &config.scale_space).ok())
        .collect();
    refined.sort_by(|a, b| {
        (a.octave, a.level, a.y, a.x, a.sigma)
            .partial_cmp(&(b.octave, b.level, b.y, b.x, b.sigma))
            .unwrap()
    });
    refined.dedup_by(|a, b| {
        (a.octave, a.level, a.x, a.y, a.sigma) == (b.octave, b.level, b.x, b.y, b.sigma)
    });
    let expected: usize = refined
        .iter()
        .map(|kp| {
            let gf = gradients[kp.octave][kp.level].as_ref().unwrap();
            assign_orientations(kp, gf, &gp.geometry, &config.orientation).len()
        })
        .sum();
    assert_eq!(file.records.len(), expected);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_image(dir.path(), "n.pgm", &common::noise_image(64, 64, 1));
    let missing = dir.path().join("missing.pgm");
    assert_eq!(run(&["detect", s(&missing)]).status.code(), Some(1));
    let junk = dir.path().join("junk.pgm");
    std::fs::write(&junk, b"not an image").unwrap();
    assert_eq!(run(&["detect", s(&junk)]).status.code(), Some(1));
    assert_eq!(run(&["detect", s(&path), "--bogus"]).status.code(), Some(2));
    assert_eq!(
        run(&["detect", s(&path), "--format", "xml"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["detect", s(&path), "--contrast_threshold", "-1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["detect", s(&path), "--edge-ratio", "wide"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["match", s(&path), s(&path), "--ratio", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["match", s(&path), s(&missing)]).status.code(),
        Some(1)
    );
}

#[test]
fn detect_writes_output_and_overlay() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_image(dir.path(), "camera.pgm", &common::fixture("camera256.pgm"));
    let json = dir.path().join("out.json");
    let overlay = dir.path().join("overlay.ppm");
    let out = run(&[
        "detect",
        s(&path),
        "-o",
        s(&json),
        "--overlay",
        s(&overlay),
        "--sigma0",
        "1.8",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    assert_eq!(doc["parameters"]["sigma0"], 1.8);
    assert!(std::fs::read(&overlay)
        .unwrap()
        .starts_with(b"P6\n256 256\n255\n"));
}

fn match_rows(args: &[&str]) -> Vec<Vec<String>> {
    let out = run(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("# index_a\tindex_b\tdistance\tratio"));
    lines
        .map(|l| l.split('\t').map(str::to_owned).collect())
        .collect()
}

#[test]
fn match_listing_behaviour() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_image(dir.path(), "a.pgm", &common::fixture("gravel256.pgm"));
    let b = write_image(
        dir.path(),
        "b.pgm",
        &common::rotate90(&common::fixture("gravel256.pgm")),
    );

    let own = match_rows(&["match", s(&a), s(&a)]);
    assert!(!own.is_empty());
    assert!(own.iter().all(|r| r[2] == "0" && r[0] == r[1]));

    assert!(match_rows(&["match", s(&a), s(&b), "--ratio", "0.0"]).is_empty());

    let strict = match_rows(&["match", s(&a), s(&b), "--ratio", "0.6"]);
    let loose = match_rows(&["match", s(&a), s(&b), "--ratio", "0.8"]);
    assert!(!strict.is_empty() && strict.len() <= loose.len());
    for row in &strict {
        assert!(loose.contains(row));
    }

    let overlay = dir.path().join("m.ppm");
    let out = run(&[
        "match",
        s(&a),
        s(&b),
        "--format",
        "json",
        "--overlay",
        s(&overlay),
        "--cross_check",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["parameters"]["cross_check"], true);
    assert!(std::fs::read(&overlay)
        .unwrap()
        .starts_with(b"P6\n512 256\n255\n"));
}

fn spawn_server(args: &[&str]) -> (std::process::Child, String) {
    let mut child = bin()
        .arg("serve")
        .args(args)
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let url = line
        .trim()
        .strip_prefix("listening on ")
        .expect("address line")
        .to_owned();
    (child, url)
}

#[test]
fn serve_on_ephemeral_port_and_stop_on_sigint() {
    let started = Instant::now();
    let (mut child, url) = spawn_server(&["--port", "0", "--host", "127.0.0.1"]);
    let port: u16 = url.rsplit(':').next().unwrap().parse().unwrap();
    assert_ne!(port, 0);

    let runtime = tokio::runtime::Runtime::new().unwrap();
    let health = runtime.block_on(async {
        reqwest::get(format!("{url}/health"))
            .await
            .unwrap()
            .status()
    });
    assert_eq!(health.as_u16(), 200);
    assert!(started.elapsed() < Duration::from_secs(1));

    // The port is now taken.
    let clash = run(&["serve", "--port", &port.to_string(), "--host", "127.0.0.1"]);
    assert_eq!(clash.status.code(), Some(1));

    unsafe { libc::kill(child.id() as libc::pid_t, libc::SIGINT) };
    let status = child.wait().unwrap();
    assert_eq!(status.code(), Some(0));
}
