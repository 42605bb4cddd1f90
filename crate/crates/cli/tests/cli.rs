use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn phdd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phdd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_config(dir: &Path, text: &str, out: &str, extra: &[&str]) -> (Output, PathBuf) {
    let cfg = dir.join(format!("{out}.conf"));
    std::fs::write(&cfg, text).unwrap();
    let out_dir = dir.join(out);
    let mut args = vec!["run", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    (phdd(&args), out_dir)
}

/// Data rows of a CSV, checking the provenance and header lines.
fn rows(path: &Path, header: &str) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let prov = lines.next().unwrap();
    assert!(prov.starts_with("# phdd ") && prov.contains("config-sha256="), "{prov}");
    assert_eq!(lines.next().unwrap(), header);
    lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn beam_spectrum_first_frequency() {
    let tmp = TempDir::new().unwrap();
    let (o, dir) = run_config(
        tmp.path(),
        "experiment = beam-spectrum\n[beam]\nn1 = 10\nn2 = 10\n",
        "spectrum",
        &["--no-plots"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(
        &dir.join("spectrum.csv"),
        "mode,omega_num,omega_ana,rel_err_pct,hz_num,hz_ana,interface_mismatch",
    );
    assert_eq!(r.len(), 10);
    assert_eq!(r[0][0], "1");
    assert!((num(&r[0][1]) - 3.5160).abs() <= 1e-3, "{}", r[0][1]);
    assert!(!dir.join("spectrum.svg").exists());
}

#[test]
fn conservation_residuals_are_small() {
    let tmp = TempDir::new().unwrap();
    let (o, dir) = run_config(
        tmp.path(),
        "experiment = conservation\n[wave]\nn = 10\nk = 1\ndt = 1e-3\nt_end = 1\n",
        "cons",
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(
        &dir.join("residuals.csv"),
        "step,residual_omega1,residual_omega2",
    );
    assert_eq!(r.len(), 1000);
    // the bootstrap step has no Ω₂ midpoint balance
    assert_eq!(r[0][2], "");
    for row in &r {
        assert!(num(&row[1]).abs() <= 1e-10, "{row:?}");
    }
    for row in &r[1..] {
        assert!(num(&row[2]).abs() <= 1e-10, "{row:?}");
    }
    let curl = rows(&dir.join("curl.csv"), "t,curl_omega2");
    assert_eq!(curl.len(), 1001);
    assert!(curl.iter().all(|r| num(&r[1]) <= 1e-10));
    assert!(dir.join("residuals.svg").exists());
}

#[test]
fn wave_convergence_rates() {
    let tmp = TempDir::new().unwrap();
    let (o, dir) = run_config(
        tmp.path(),
        "experiment = wave-convergence\n[wave]\nk = 1\n[convergence]\nsizes = 4, 8, 16\n",
        "conv",
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let errs = rows(
        &dir.join("convergence.csv"),
        "h,err_alpha_1,err_beta_1,err_alpha_2,err_beta_2",
    );
    assert_eq!(errs.len(), 3);
    let rates = rows(&dir.join("rates.csv"), "block,rate");
    for r in &rates {
        let rate = num(&r[1]);
        if r[0] == "alpha_2" {
            assert!((1.7..=2.3).contains(&rate), "{r:?}");
        } else {
            assert!((0.7..=1.3).contains(&rate), "{r:?}");
        }
    }
    let svg = std::fs::read_to_string(dir.join("convergence.svg")).unwrap();
    assert!(svg.contains("<polygon"));
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let (o, _) = run_config(tmp.path(), "experiment = wave-sim\n[wave]\nk = 7\n", "bad", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("wave"));

    let (o, _) = run_config(tmp.path(), "experiment = beam-sim\n[beam]\nspeed = 2\n", "key", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("beam.speed"));

    let missing = tmp.path().join("nope.conf");
    let o = phdd(&["run", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));

    // 3 + 3 beam elements are only stable below dt ≈ 2.9e-4
    let (o, _) = run_config(
        tmp.path(),
        "experiment = beam-sim\n[beam]\ndt = 1e-3\n",
        "unstable",
        &[],
    );
    assert_eq!(o.status.code(), Some(3));

    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let cfg = tmp.path().join("ok.conf");
    std::fs::write(&cfg, "experiment = beam-spectrum\n").unwrap();
    let o = phdd(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let text = "experiment = beam-sim\n[run]\nstride = 50\n[beam]\nt_end = 0.2\n";
    let (a, da) = run_config(tmp.path(), text, "a", &[]);
    let (b, db) = run_config(tmp.path(), text, "b", &[]);
    assert!(a.status.success() && b.status.success());
    let mut names: Vec<_> = std::fs::read_dir(&da)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 5);
    for n in names {
        assert_eq!(
            std::fs::read(da.join(&n)).unwrap(),
            std::fs::read(db.join(&n)).unwrap(),
            "{n:?}"
        );
    }
}

#[test]
fn shipped_configs_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = TempDir::new().unwrap();
    let mut entries: Vec<_> = std::fs::read_dir(&root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "conf"))
        .collect();
    entries.sort();
    assert_eq!(entries.len(), 7);
    for cfg in entries {
        let out = tmp.path().join(cfg.file_stem().unwrap());
        let o = phdd(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(
            o.status.success(),
            "{}: {}",
            cfg.display(),
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(std::fs::read_dir(&out).unwrap().count() > 0);
    }
}
