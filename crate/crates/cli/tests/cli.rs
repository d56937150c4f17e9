use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dec2d(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dec2d"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field(line: &str, key: &str) -> f64 {
    line.split_whitespace()
        .find_map(|t| t.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing in {line}"))
        .trim_end_matches('s')
        .parse()
        .unwrap()
}

#[test]
fn solve_both_on_generated_disk() {
    let dir = tempfile::tempdir().unwrap();
    let o = dec2d(
        dir.path(),
        &["solve", "--gen-disk", "4", "--kappa", "1", "--source", "-1", "--dirichlet", "outer:10", "--method", "both", "--out", "run"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("dec: max_u=10.2500 "));
    assert!((field(lines[1], "max_u") - 10.25).abs() < 5e-3);
    for f in ["dec.csv", "dec.vtk", "fem.csv", "fem.vtk", "report.txt"] {
        assert!(dir.path().join("run").join(f).is_file(), "{f}");
    }
    let csv = fs::read_to_string(dir.path().join("run/dec.csv")).unwrap();
    assert!(csv.starts_with("vertex,x,y,u,flux_mag\n"));
    assert_eq!(csv.lines().count(), 82);
    let report = fs::read_to_string(dir.path().join("run/report.txt")).unwrap();
    assert!(report.contains("nodes=81 elements=128"));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = dec2d(dir.path(), &["solve", "--gen-disk", "6", "--source", "-1", "--dirichlet", "outer:10", "--method", "both", "--out", out]);
        assert!(o.status.success());
    }
    for f in ["dec.csv", "fem.csv", "dec.vtk"] {
        assert_eq!(
            fs::read(dir.path().join("a").join(f)).unwrap(),
            fs::read(dir.path().join("b").join(f)).unwrap()
        );
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    for (threads, out) in [("1", "one"), ("4", "four")] {
        let o = Command::new(env!("CARGO_BIN_EXE_dec2d"))
            .args(["solve", "--gen-disk", "12", "--source", "-1", "--dirichlet", "outer:10", "--out", out])
            .env("DEC2D_THREADS", threads)
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert!(o.status.success());
    }
    assert_eq!(
        fs::read(dir.path().join("one/dec.csv")).unwrap(),
        fs::read(dir.path().join("four/dec.csv")).unwrap()
    );
}

#[test]
fn mesh_files_and_config() {
    let dir = tempfile::tempdir().unwrap();
    assert!(dec2d(dir.path(), &["gen-disk", "--rings", "3", "--out", "mesh/disk"]).status.success());
    fs::write(dir.path().join("problem.txt"), "kappa = 2\nsource = -2\ndirichlet = outer:10\n").unwrap();
    let o = dec2d(dir.path(), &["solve", "--mesh", "mesh/disk", "--config", "problem.txt", "--matrix", "--out", "r"]);
    assert!(o.status.success(), "{}", stderr(&o));
    // κ=2, q=-2 is the unit problem scaled: same solution
    assert!((field(stdout(&o).trim(), "max_u") - 10.25).abs() < 1e-9);
    let mtx = fs::read_to_string(dir.path().join("r/dec_system.mtx")).unwrap();
    assert!(mtx.starts_with("%%MatrixMarket matrix coordinate real general"));

    let o = dec2d(dir.path(), &["solve", "--node", "mesh/disk.node", "--ele", "mesh/missing.ele", "--dirichlet", "outer:1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mesh/missing.ele"));
}

#[test]
fn hole_with_neumann_boundary() {
    let dir = tempfile::tempdir().unwrap();
    // square [-1,1]² minus [-0.5,0.5]², 16 vertices, markers 1 outside, 2 inside
    let mut node = String::from("16 2 0 1\n");
    let outer = [(-1.0, -1.0), (0.0, -1.0), (1.0, -1.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (-1.0, 1.0), (-1.0, 0.0)];
    for (i, (x, y)) in outer.iter().enumerate() {
        node += &format!("{} {x} {y} 1\n", i + 1);
    }
    for (i, (x, y)) in outer.iter().enumerate() {
        node += &format!("{} {} {} 2\n", i + 9, x * 0.5, y * 0.5);
    }
    let mut ele = String::from("16 3 0\n");
    for k in 0..8 {
        let (o0, o1, i0, i1) = (k + 1, (k + 1) % 8 + 1, k + 9, (k + 1) % 8 + 9);
        ele += &format!("{} {i0} {o0} {o1}\n", 2 * k + 1);
        ele += &format!("{} {i0} {o1} {i1}\n", 2 * k + 2);
    }
    fs::write(dir.path().join("ring.node"), node).unwrap();
    fs::write(dir.path().join("ring.ele"), ele).unwrap();
    let o = dec2d(
        dir.path(),
        &["solve", "--mesh", "ring", "--kappa", "80.2", "--source", "20.2", "--dirichlet", "1:10", "--neumann", "2:100", "--method", "both"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let (dec, fem): (Vec<&str>, Vec<&str>) = out.lines().partition(|l| l.starts_with("dec"));
    assert!(field(dec[0], "max_u") > 10.0);
    assert!(field(fem[0], "max_u") > 10.0);
}

#[test]
fn compare_table_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = dec2d(dir.path(), &["compare", "--rings", "1,2,4,8", "--out", "t.csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 5);
    let csv = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let flux: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(5).unwrap().parse().unwrap()).collect();
    assert!(flux.windows(2).all(|w| w[1] > w[0] && w[1] < 0.5));

    let o = dec2d(dir.path(), &["compare", "--rings"]);
    assert_eq!(o.status.code(), Some(2));
    let o = dec2d(dir.path(), &["compare", "--rings", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dual_of_hexagon() {
    let dir = tempfile::tempdir().unwrap();
    let mut node = String::from("7 2 0 1\n");
    for k in 0..6 {
        let a = std::f64::consts::PI / 3.0 * k as f64;
        node += &format!("{k} {} {} 1\n", a.cos(), a.sin());
    }
    node += "6 0 0 0\n";
    let mut ele = String::from("6 3 0\n");
    for k in 0..6 {
        ele += &format!("{k} {k} {} 6\n", (k + 1) % 6);
    }
    fs::write(dir.path().join("hex.node"), node).unwrap();
    fs::write(dir.path().join("hex.ele"), ele).unwrap();
    let o = dec2d(dir.path(), &["dual", "--mesh", "hex", "--out", "d"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let count = |f: &str| fs::read_to_string(dir.path().join("d").join(f)).unwrap().lines().count() - 1;
    assert_eq!(count("dual_vertices.csv"), 6);
    assert_eq!(count("dual_edges.csv"), 12);
    assert_eq!(count("dual_cells.csv"), 7);
    let vtk = fs::read_to_string(dir.path().join("d/dual.vtk")).unwrap();
    assert!(vtk.contains("DATASET UNSTRUCTURED_GRID"));
}

#[test]
fn convergence_csv_reports_orders() {
    let dir = tempfile::tempdir().unwrap();
    let o = dec2d(dir.path(), &["convergence", "--rings", "2,4,8,16", "--method", "fem"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("method,rings,h,linf,l2,centroid_linf,order_linf,order_l2,order_centroid\n"));
    let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][6], "");
    for r in &rows[1..] {
        let l2: f64 = r[7].parse().unwrap();
        assert!(l2 >= 1.8, "{r:?}");
    }
}

#[test]
fn sample_diameter_peaks_at_center() {
    let dir = tempfile::tempdir().unwrap();
    let o = dec2d(
        dir.path(),
        &["sample", "--gen-disk", "8", "--source", "-1", "--dirichlet", "outer:10", "--from", "-1,0", "--to", "1,0", "--n", "201", "--out", "s.csv"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let values: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 201);
    let peak = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!((peak - 10.25).abs() < 1e-9);
    assert!((values[100] - 10.25).abs() < 1e-9);

    let o = dec2d(dir.path(), &["sample", "--gen-disk", "2", "--dirichlet", "outer:0", "--from", "0,0", "--to", "1,0", "--n", "1"]);
    assert_eq!(o.status.code(), Some(2));
}
