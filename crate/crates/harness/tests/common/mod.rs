//! Golden-file checks shared by the integration targets.
//!
//! Set `EFK_BLESS=1` to rewrite the golden files from the current build.

use std::fs;
use std::path::{Path, PathBuf};

use efk_core::ProblemSpec;
use efk_harness::{run, Method, RunConfig};

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Example 1 on a 16 x 16 grid with 4 steps.
pub fn tiny_config(method: Method) -> RunConfig {
    let mut cfg = RunConfig::new(ProblemSpec::example1(), 16, 4, method);
    cfg.snapshot_times = vec![0.5];
    cfg
}

fn is_float_17(s: &str) -> bool {
    let Some((mantissa, exp)) = s.split_once('e') else {
        return false;
    };
    let mantissa = mantissa.strip_prefix('-').unwrap_or(mantissa);
    let digits_ok = matches!(mantissa.split_once('.'), Some((a, b))
        if a.len() == 1 && b.len() == 16 && a.chars().chain(b.chars()).all(|c| c.is_ascii_digit()));
    digits_ok && exp.parse::<i32>().is_ok()
}

/// Compares `actual` with `golden`: identical layout, integer columns exact,
/// float columns formatted with 17 significant digits and equal to the
/// golden values within `rel_tol`.
pub fn compare_csv(actual: &str, golden: &str, int_columns: &[usize], rel_tol: f64) -> Result<(), String> {
    if actual.contains('\r') {
        return Err("CR in line endings".into());
    }
    if !actual.ends_with('\n') {
        return Err("missing final LF".into());
    }
    let (a, g): (Vec<_>, Vec<_>) = (actual.lines().collect(), golden.lines().collect());
    if a.len() != g.len() {
        return Err(format!("{} lines, golden has {}", a.len(), g.len()));
    }
    for (k, (la, lg)) in a.iter().zip(&g).enumerate() {
        let (fa, fg): (Vec<_>, Vec<_>) = (la.split(',').collect(), lg.split(',').collect());
        if fa.len() != fg.len() {
            return Err(format!("line {}: {} fields, golden has {}", k + 1, fa.len(), fg.len()));
        }
        for (c, (xa, xg)) in fa.iter().zip(&fg).enumerate() {
            let header = xg.parse::<f64>().is_err();
            if header || int_columns.contains(&c) {
                if xa != xg {
                    return Err(format!("line {}, field {}: '{xa}' != '{xg}'", k + 1, c + 1));
                }
                continue;
            }
            if !is_float_17(xa) {
                return Err(format!("line {}, field {}: '{xa}' is not 17-digit scientific", k + 1, c + 1));
            }
            let (va, vg): (f64, f64) = (xa.parse().unwrap(), xg.parse().unwrap());
            if (va - vg).abs() > rel_tol * vg.abs().max(1e-300) && (va - vg).abs() > 1e-14 {
                return Err(format!("line {}, field {}: {va} differs from golden {vg}", k + 1, c + 1));
            }
        }
    }
    Ok(())
}

/// Runs the tiny configurations and checks their CSVs against the goldens.
pub fn check_golden_tiny_runs() -> Result<(), String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bless = std::env::var_os("EFK_BLESS").is_some();
    for method in [Method::Frs, Method::Alrs] {
        let mut cfg = tiny_config(method);
        let dir = tmp.path().join(method.name());
        cfg.output_dir = Some(dir.clone());
        run(&cfg).map_err(|e| e.to_string())?;
        for (file, ints) in [("series.csv", &[0usize, 4][..]), ("final.csv", &[][..]), ("snapshot_t0.500000.csv", &[][..])] {
            let actual = fs::read_to_string(dir.join(file)).map_err(|e| format!("{file}: {e}"))?;
            let golden_path = golden_dir().join(format!("{}_{file}", method.name()));
            if bless {
                fs::write(&golden_path, &actual).map_err(|e| e.to_string())?;
                continue;
            }
            let golden = fs::read_to_string(&golden_path).map_err(|e| format!("{}: {e}", golden_path.display()))?;
            compare_csv(&actual, &golden, ints, 1e-10).map_err(|e| format!("{} {file}: {e}", method.name()))?;
        }
    }
    Ok(())
}
