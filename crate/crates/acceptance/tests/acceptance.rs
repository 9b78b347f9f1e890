//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use nalgebra::DMatrix;
use tlbr::bench::{self, Size, Suite};
use tlbr::cli::{load_triplets, run, Cli};
use tlbr::core::oracle::{bcirc_oracle, naive_spectrum};
use tlbr::core::rng::{randn, NormalRng};
use tlbr::core::tensor::identity_tensor;
use tlbr::core::{t_svd, tlbr as solve, Complex64, DenseOperator, SolverConfig, Tensor3};
use tlbr::image_io::save_image;
use tlbr::{t3b, SolverSettings};

const THREADS: &str = "4";

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Runs the `tlbr` command line in-process.
fn cli(args: &[&str]) -> i32 {
    let mut argv = vec!["tlbr", "--quiet", "--threads", THREADS];
    argv.extend_from_slice(args);
    let parsed = Cli::try_parse_from(argv).expect("valid command line");
    match run(parsed) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("tlbr: {e}");
            e.exit_code()
        }
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(p: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(p)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn column(p: &Path, j: usize) -> Vec<f64> {
    csv_rows(p).iter().map(|r| r[j].parse().unwrap()).collect()
}

fn fmt_list(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.2e}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut dims = NormalRng::new(11);
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let mut pick = |hi: u64| 1 + (dims.next_u64() % hi) as usize;
        let (l, p, q, n) = (pick(5), pick(5), pick(5), pick(4));
        let a = randn(l, p, n, 2 * seed);
        let b = randn(p, q, n, 2 * seed + 1);
        let want = bcirc_oracle(&a, &b).unwrap();
        worst = worst.max(a.tprod(&b).unwrap().rel_diff(&want).unwrap());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-12 && secs < 5.0,
        format!("max relative error {worst:.2e} over 100 pairs, {secs:.2} s"),
    )
}

fn orth_error(q: &Tensor3) -> f64 {
    q.transpose()
        .tprod(q)
        .unwrap()
        .sub(&identity_tensor(q.cols(), q.tubes()).unwrap())
        .unwrap()
        .fnorm()
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let (mut rec, mut orth, mut ident) = (0.0f64, 0.0f64, 0.0f64);
    let mut ordered = true;
    let mut dims = NormalRng::new(12);
    for seed in 0..50u64 {
        let mut pick = |hi: u64| 1 + (dims.next_u64() % hi) as usize;
        let (l, p, n) = (pick(12), pick(10), pick(5));
        let a = randn(l, p, n, 500 + seed);
        let svd = t_svd(&a, true).unwrap();
        rec = rec.max(svd.reconstruct().unwrap().rel_diff(&a).unwrap());
        orth = orth.max(orth_error(&svd.u)).max(orth_error(&svd.v));
        let frames = naive_spectrum(&svd.s);
        for i in 0..svd.rank() {
            let mean = frames.iter().map(|f| f[(i, i)]).sum::<Complex64>() / n as f64;
            ident = ident.max((svd.s.get(i, i, 0) - mean.re).abs());
        }
        ordered &= svd.sigmas().windows(2).all(|w| w[0] >= w[1]);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        rec <= 1e-10 && orth <= 1e-11 && ident <= 1e-12 && ordered && secs < 10.0,
        format!(
            "reconstruction {rec:.2e}, orthogonality {orth:.2e}, first-entry identity {ident:.2e}, tube norms ordered: {ordered}, {secs:.2} s"
        ),
    )
}

/// Criterion 3's command; returns the output directory.
fn table_one_run(work: &Path, name: &str) -> PathBuf {
    let input = work.join("table1.t3b");
    if !input.exists() {
        t3b::save(&input, &randn(100, 100, 3, 0)).unwrap();
    }
    let out = work.join(name);
    let code = cli(&[
        "svd",
        s(&input),
        "--k",
        "4",
        "--m",
        "20",
        "--seed",
        "0",
        "--reference",
        "full-tsvd",
        "--out",
        s(&out),
    ]);
    assert_eq!(code, 0, "tlbr svd exited with {code}");
    out
}

fn criterion_3(work: &Path) -> Outcome {
    let start = Instant::now();
    let out = table_one_run(work, "table1-a");
    let secs = start.elapsed().as_secs_f64();
    let errors = column(&out.join("reference.csv"), 1);
    let pass = errors.len() == 4 && errors.iter().all(|&e| e <= 1e-10) && secs < 30.0;
    outcome(
        pass,
        format!("tube errors [{}], {secs:.2} s", fmt_list(&errors)),
    )
}

fn criterion_4() -> Outcome {
    let size = Size {
        rows: 100,
        cols: 100,
        tubes: 3,
    };
    let rows = bench::run(Suite::Table2, &[size], &SolverSettings::default()).unwrap();
    let iters: Vec<usize> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    let (m10, m20) = (iters[0], iters[1]);
    outcome(
        m20 <= 5 && m10 > m20,
        format!("iterations m=10: {m10}, m=20: {m20}"),
    )
}

fn criterion_5() -> Outcome {
    let size = Size {
        rows: 100,
        cols: 100,
        tubes: 3,
    };
    let mut pass = true;
    let mut detail = Vec::new();
    let mut worst_harm = 0.0f64;
    for seed in 0..5u64 {
        let settings = SolverSettings {
            seed,
            ..SolverSettings::default()
        };
        let rows = bench::run(Suite::Table3, &[size], &settings).unwrap();
        let ritz: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
        let harm: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
        worst_harm = harm.iter().fold(worst_harm, |m, &x| m.max(x));
        let wins = ritz.iter().zip(&harm).filter(|(r, h)| h <= r).count();
        pass &= wins >= 3;
        detail.push(format!(
            "seed {seed}: harm<=ritz on {wins}/4 (ritz [{}], harm [{}])",
            fmt_list(&ritz),
            fmt_list(&harm)
        ));
    }
    pass &= worst_harm <= 1e-9;
    outcome(
        pass,
        format!("max harmonic error {worst_harm:.2e}; {}", detail.join("; ")),
    )
}

fn criterion_6() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..5u64 {
        let a = randn(40, 25, 1, 600 + seed);
        let out = solve(
            &DenseOperator::new(&a),
            &SolverConfig::new(5, 15).seed(seed),
        )
        .unwrap();
        let dense = DMatrix::from_column_slice(40, 25, a.as_slice()).singular_values();
        let mut want: Vec<f64> = dense.iter().copied().collect();
        want.sort_by(|x, y| y.total_cmp(x));
        let frame = tlbr::core::frame::frame_svd(&fft_frame(&a), true)
            .unwrap()
            .s;
        for i in 0..5 {
            let got = out.triplets.s[i].values()[0];
            worst = worst.max((got - want[i]).abs()).max((got - frame[i]).abs());
        }
    }
    outcome(
        worst <= 1e-10,
        format!("max deviation from dense SVD {worst:.2e} (5 matrices 40x25, k=5)"),
    )
}

fn fft_frame(a: &Tensor3) -> tlbr::core::frame::ComplexMatrix {
    tlbr::core::fft3(a).frame(0).clone()
}

/// Smooth `256 × 256` colour picture with some texture.
fn picture() -> Tensor3 {
    let mut rng = NormalRng::new(70);
    Tensor3::from_fn(256, 256, 3, |i, j, c| {
        let (y, x) = (i as f64 / 256.0, j as f64 / 256.0);
        let ring = ((x - 0.5).powi(2) + (y - 0.4).powi(2)).sqrt();
        let v = 0.45
            + 0.3 * (12.0 * ring + c as f64).cos() * (-3.0 * ring).exp()
            + 0.1 * (25.0 * x).sin() * (9.0 * y + c as f64).cos()
            + if (x * 8.0) as i64 % 2 == (y * 6.0) as i64 % 2 {
                0.15
            } else {
                0.0
            }
            + 0.03 * rng.normal();
        v.clamp(0.0, 1.0)
    })
    .unwrap()
}

fn criterion_7(work: &Path) -> Outcome {
    let image = work.join("picture.png");
    save_image(&picture(), &image).unwrap();
    let start = Instant::now();
    let mut errors = Vec::new();
    for method in ["tlbr", "tsvd"] {
        let out = work.join(format!("compress-{method}"));
        let code = cli(&[
            "compress",
            s(&image),
            "--k",
            "5,10,15,25",
            "--method",
            method,
            "--out",
            s(&out),
        ]);
        assert_eq!(code, 0);
        errors.push(column(&out.join("relerr.csv"), 2));
    }
    let secs = start.elapsed().as_secs_f64();
    let gap = errors[0]
        .iter()
        .zip(&errors[1])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let monotone = errors.iter().all(|e| e.windows(2).all(|w| w[1] <= w[0]));
    outcome(
        gap <= 1e-6 && monotone && secs < 120.0,
        format!(
            "relerr tlbr [{}], full [{}], max gap {gap:.2e}, monotone: {monotone}, {secs:.2} s",
            fmt_list(&errors[0]),
            fmt_list(&errors[1])
        ),
    )
}

/// `root/person<i>/shot<j>.png`: a smooth pattern per person plus noise.
fn write_faces(root: &Path) {
    for person in 0..5u64 {
        let dir = root.join(format!("person{person}"));
        fs::create_dir_all(&dir).unwrap();
        let params = NormalRng::new(1000 + person).normals(12);
        for shot in 0..6u64 {
            let mut noise = NormalRng::new(7919 * (person + 1) + shot);
            let img = Tensor3::from_fn(24, 20, 3, |i, j, c| {
                let (y, x) = (i as f64 / 24.0, j as f64 / 20.0);
                let p = &params[4 * c..4 * c + 4];
                let base = 0.5
                    + 0.2 * (3.0 * p[0] * x + 2.0 * p[1] * y).sin()
                    + 0.15 * (4.0 * p[2] * x * y + p[3]).cos();
                (base + 0.02 * noise.normal()).clamp(0.0, 1.0)
            })
            .unwrap();
            save_image(&img, &dir.join(format!("shot{shot}.png"))).unwrap();
        }
    }
}

fn recognition_run(root: &Path, out: &Path) -> i32 {
    cli(&[
        "recognize",
        s(root),
        "--holdout",
        "2",
        "--k",
        "4",
        "--seed",
        "0",
        "--evaluate",
        "--out",
        s(out),
    ])
}

fn criterion_8(work: &Path) -> Outcome {
    let root = work.join("faces");
    write_faces(&root);
    let out = work.join("recognize-a");
    assert_eq!(recognition_run(&root, &out), 0);
    let rate: f64 = csv_rows(&out.join("rate.csv"))[0][2].parse().unwrap();

    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("basis/meta.json")).unwrap()).unwrap();
    let (name, label) = (
        meta["names"][0].as_str().unwrap(),
        meta["labels"][0].as_str().unwrap(),
    );
    let probe = root.join(name);
    let self_out = work.join("recognize-self");
    let code = cli(&[
        "recognize",
        s(&root),
        "--holdout",
        "2",
        "--k",
        "4",
        "--seed",
        "0",
        "--probe",
        s(&probe),
        "--out",
        s(&self_out),
    ]);
    assert_eq!(code, 0);
    let hit = &csv_rows(&self_out.join("matches.csv"))[0];
    let distance: f64 = hit[3].parse().unwrap();
    let pass = rate == 100.0 && hit[1] == label && distance <= 1e-9;
    outcome(
        pass,
        format!("identification rate {rate}% on 10 probes; self-probe {} -> {} at distance {distance:.2e}", name, hit[1]),
    )
}

fn criterion_9(work: &Path) -> Outcome {
    let out = work.join("table1-a");
    let rows = csv_rows(&out.join("history.csv"));
    let (_, sten, _) = load_triplets(&out).unwrap();
    let resolved = tlbr::config::load(&out.join("resolved.conf")).unwrap();
    let delta: f64 = resolved["delta"].parse().unwrap();
    let threshold = delta * sten.get(0, 0, 0);
    let restarts = rows
        .iter()
        .map(|r| r[0].parse::<usize>().unwrap())
        .max()
        .unwrap();
    let bound = |restart: usize, i: usize| -> f64 {
        rows.iter()
            .find(|r| r[0] == restart.to_string() && r[1] == i.to_string())
            .map(|r| r[2].parse().unwrap())
            .unwrap()
    };
    let mut pass = true;
    let mut detail = Vec::new();
    for i in 1..=4 {
        let series: Vec<f64> = (1..=restarts).map(|r| bound(r, i)).collect();
        let last = *series.last().unwrap();
        pass &= last <= threshold && last <= series[0];
        detail.push(format!("triplet {i}: [{}]", fmt_list(&series)));
    }
    outcome(
        pass,
        format!(
            "threshold delta*s1(1) = {threshold:.2e}; {}",
            detail.join("; ")
        ),
    )
}

fn criterion_10(work: &Path) -> Outcome {
    let again = table_one_run(work, "table1-b");
    let first = work.join("table1-a");
    let mut same = Vec::new();
    for f in ["history.csv", "reference.csv"] {
        same.push((
            f,
            fs::read(first.join(f)).unwrap() == fs::read(again.join(f)).unwrap(),
        ));
    }
    let out = work.join("recognize-b");
    assert_eq!(recognition_run(&work.join("faces"), &out), 0);
    for f in ["matches.csv", "rate.csv"] {
        same.push((
            f,
            fs::read(work.join("recognize-a").join(f)).unwrap() == fs::read(out.join(f)).unwrap(),
        ));
    }
    let pass = same.iter().all(|(_, b)| *b);
    let detail = same
        .iter()
        .map(|(f, b)| format!("{f}: {}", if *b { "identical" } else { "differs" }))
        .collect::<Vec<_>>();
    outcome(pass, format!("{} ({THREADS} threads)", detail.join(", ")))
}

fn main() {
    let work = tempfile::tempdir().unwrap();
    let w = work.path();
    let criteria: Vec<(usize, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, Box::new(criterion_1)),
        (2, Box::new(criterion_2)),
        (3, Box::new(|| criterion_3(w))),
        (4, Box::new(criterion_4)),
        (5, Box::new(criterion_5)),
        (6, Box::new(criterion_6)),
        (7, Box::new(|| criterion_7(w))),
        (8, Box::new(|| criterion_8(w))),
        (9, Box::new(|| criterion_9(w))),
        (10, Box::new(|| criterion_10(w))),
    ];
    let mut failed = Vec::new();
    for (n, check) in &criteria {
        let result = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| outcome(false, "panicked before reaching a verdict".into()));
        println!(
            "criterion {n}: {} {}",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
        if !result.pass {
            failed.push(*n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
