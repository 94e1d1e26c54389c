use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use siftsvc_core::image_io::{render_keypoints, render_matches};
use siftsvc_core::keyfile::KeypointFile;
use siftsvc_core::report::{DetectResponse, MatchResponse, Precision};
use siftsvc_core::{
    detect as run_detect, load_image, match_descriptors, Features, MatchConfig, RasterImage,
    SiftConfig,
};
use siftsvc_service::params::{
    apply_detector_field, apply_matcher_field, validate_detector, validate_matcher,
};
use siftsvc_service::{ApiError, ServiceConfig};

use crate::{DetectArgs, DetectFormat, DetectorFlags, Failure, MatchArgs, MatchFormat, ServeArgs};

fn usage(err: ApiError) -> Failure {
    Failure::Usage(err.message)
}

fn detector_config(flags: &DetectorFlags) -> Result<SiftConfig, Failure> {
    let mut config = SiftConfig::default();
    for (name, value) in flags.fields() {
        apply_detector_field(&mut config, name, value).map_err(usage)?;
    }
    validate_detector(&config).map_err(usage)?;
    Ok(config)
}

fn read_image(path: &Path) -> Result<RasterImage, Failure> {
    let bytes =
        std::fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    load_image(&bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn features_of(image: &RasterImage, path: &Path, config: &SiftConfig) -> Result<Features, Failure> {
    run_detect(image, config).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, data: &[u8]) -> Result<(), Failure> {
    let result = match path {
        Some(p) => std::fs::write(p, data),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(data).and_then(|_| out.flush())
        }
    };
    result.map_err(|e| {
        let target = path.map_or("stdout".into(), |p| p.display().to_string());
        Failure::Input(format!("writing {target}: {e}"))
    })
}

pub fn detect(args: DetectArgs) -> Result<(), Failure> {
    let config = detector_config(&args.detector)?;
    let image = read_image(&args.image)?;
    let start = Instant::now();
    let features = features_of(&image, &args.image, &config)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;

    let text = match args.format {
        DetectFormat::Json => {
            let doc = DetectResponse::new(
                image.width(),
                image.height(),
                &config.scale_space,
                &features,
                ms,
                args.precision.into(),
            );
            doc.to_json()
        }
        DetectFormat::Lowe => {
            KeypointFile::from_features(&features, config.descriptor.len()).to_text()
        }
    };
    write_out(args.output.as_deref(), text.as_bytes())?;

    if let Some(path) = &args.overlay {
        let rendered = render_keypoints(&image, &features.keypoints);
        write_out(Some(path), &rendered.ppm)?;
    }
    Ok(())
}

pub fn match_images(args: MatchArgs) -> Result<(), Failure> {
    let config = detector_config(&args.detector)?;
    let mut matcher = MatchConfig {
        cross_check: args.cross_check,
        ..Default::default()
    };
    if let Some(r) = &args.ratio {
        apply_matcher_field(&mut matcher, "ratio_threshold", r).map_err(usage)?;
    }
    validate_matcher(&matcher).map_err(usage)?;

    let a = read_image(&args.image_a)?;
    let b = read_image(&args.image_b)?;
    let start = Instant::now();
    let fa = features_of(&a, &args.image_a, &config)?;
    let fb = features_of(&b, &args.image_b, &config)?;
    let matches = match_descriptors(&fa.descriptors, &fb.descriptors, &matcher)
        .map_err(|e| Failure::Input(e.to_string()))?;
    let ms = start.elapsed().as_secs_f64() * 1e3;

    let precision: Precision = args.precision.into();
    let text = match args.format {
        MatchFormat::Json => MatchResponse::new(
            &fa,
            &fb,
            &matches,
            &config.scale_space,
            &matcher,
            ms,
            precision,
        )
        .to_json(),
        MatchFormat::Tsv => {
            let mut out = String::from("# index_a\tindex_b\tdistance\tratio\txa\tya\txb\tyb\n");
            for m in &matches {
                let (ka, kb) = (&fa.keypoints[m.index_a], &fb.keypoints[m.index_b]);
                let p = |v: f32| precision.apply(v as f64);
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    m.index_a,
                    m.index_b,
                    precision.apply(m.distance),
                    precision.apply(m.ratio),
                    p(ka.x),
                    p(ka.y),
                    p(kb.x),
                    p(kb.y)
                )
                .expect("writing to a String");
            }
            out
        }
    };
    write_out(args.output.as_deref(), text.as_bytes())?;

    if let Some(path) = &args.overlay {
        let ppm = render_matches(&a, &b, &matches, &fa.keypoints, &fb.keypoints)
            .map_err(|e| Failure::Input(e.to_string()))?;
        write_out(Some(path), &ppm)?;
    }
    Ok(())
}

async fn shutdown_signal() {
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        let mut term = signal(SignalKind::terminate()).expect("SIGTERM handler installs");
        tokio::select! {
            _ = tokio::signal::ctrl_c() => {}
            _ = term.recv() => {}
        }
    }
    #[cfg(not(unix))]
    let _ = tokio::signal::ctrl_c().await;
    log::info!("shutting down");
}

pub fn serve(args: ServeArgs) -> Result<(), Failure> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut config = ServiceConfig::from_env().map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(port) = args.port {
        config.port = port;
    }
    if let Some(workers) = args.workers {
        if workers == 0 {
            return Err(Failure::Usage("--workers must be at least 1".into()));
        }
        config.workers = workers;
    }
    if let Some(bytes) = args.max_upload_bytes {
        if bytes == 0 {
            return Err(Failure::Usage("--max_upload_bytes must be positive".into()));
        }
        config.limits.max_upload_bytes = bytes;
    }
    if args.static_dir.is_some() {
        config.static_dir = args.static_dir;
    }

    let runtime =
        tokio::runtime::Runtime::new().map_err(|e| Failure::Input(format!("runtime: {e}")))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((args.host, config.port))
            .await
            .map_err(|e| {
                Failure::Input(format!("cannot bind {}:{}: {e}", args.host, config.port))
            })?;
        let addr = listener
            .local_addr()
            .map_err(|e| Failure::Input(e.to_string()))?;
        println!("listening on http://{addr}");
        let _ = std::io::stdout().flush();
        siftsvc_service::serve(listener, &config, shutdown_signal())
            .await
            .map_err(|e| Failure::Input(format!("server: {e}")))
    })
}
