use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use geodiam_ffi::*;

fn grid(k: usize, space: GeodiamSpace) -> *mut GeodiamGraph {
    let xy: Vec<f64> = (0..k * k).flat_map(|i| [(i % k) as f64, (i / k) as f64]).collect();
    let mut g = ptr::null_mut();
    let s = unsafe { geodiam_graph_from_points(space, k as f64, xy.as_ptr(), (k * k) as u64, 1.0, &mut g) };
    assert_eq!(s, GeodiamStatus::Ok);
    g
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(geodiam_last_error()) }.to_string_lossy().into_owned()
}

fn all_three(g: *const GeodiamGraph) -> [u32; 3] {
    let mut fr = GeodiamFrameworkResult::default();
    let mut ir = GeodiamIfubResult::default();
    let mut nd = 0u32;
    unsafe {
        assert_eq!(geodiam_diameter_framework(g, ptr::null(), &mut fr), GeodiamStatus::Ok);
        assert_eq!(geodiam_diameter_ifub(g, -1, &mut ir), GeodiamStatus::Ok);
        assert_eq!(geodiam_diameter_naive(g, &mut nd, ptr::null_mut()), GeodiamStatus::Ok);
    }
    [fr.diameter, ir.diameter, nd]
}

#[test]
fn grids() {
    let sq = grid(3, GeodiamSpace::Square);
    let to = grid(3, GeodiamSpace::Torus);
    assert_eq!(all_three(sq), [4, 4, 4]);
    assert_eq!(all_three(to), [2, 2, 2]);
    unsafe {
        assert_eq!(geodiam_graph_num_vertices(sq), 9);
        assert_eq!(geodiam_graph_num_edges(sq), 12);
        assert_eq!(geodiam_graph_num_edges(to), 18);
        geodiam_graph_free(sq);
        geodiam_graph_free(to);
    }
}

#[test]
fn generated_graph_agrees() {
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(geodiam_graph_generate(600, 0.3, GeodiamSpace::Torus, 5, &mut g), GeodiamStatus::Ok);
        assert_eq!(geodiam_graph_is_connected(g), 1);
    }
    let d = all_three(g);
    assert!(d[0] == d[1] && d[1] == d[2]);
    let mut opts = geodiam_framework_options_default();
    opts.strategy = GeodiamStrategy::SizeDoubling;
    opts.leaf_level = 2;
    let mut fr = GeodiamFrameworkResult::default();
    unsafe {
        assert_eq!(geodiam_diameter_framework(g, &opts, &mut fr), GeodiamStatus::Ok);
        geodiam_graph_free(g);
    }
    assert_eq!((fr.diameter, fr.leaf_level), (d[2], 2));
    assert!(fr.total_work >= fr.oracle_work);
}

#[test]
fn errors_are_reported() {
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(geodiam_graph_generate(100, 0.6, GeodiamSpace::Square, 0, &mut g), GeodiamStatus::InvalidArgument);
        assert!(last_error().contains("rho"));
        assert!(g.is_null());
        assert_eq!(
            geodiam_graph_generate(100, 0.3, GeodiamSpace::Square, 0, ptr::null_mut()),
            GeodiamStatus::NullPointer
        );
        let mut d = 0;
        assert_eq!(geodiam_diameter_naive(ptr::null(), &mut d, ptr::null_mut()), GeodiamStatus::NullPointer);
        geodiam_graph_free(ptr::null_mut());
        assert_eq!(geodiam_graph_num_vertices(ptr::null()), 0);

        let xy = [0.5, 0.5, 3.5, 3.5];
        assert_eq!(
            geodiam_graph_from_points(GeodiamSpace::Square, 4.0, xy.as_ptr(), 2, 1.0, &mut g),
            GeodiamStatus::Ok
        );
        let mut fr = GeodiamFrameworkResult::default();
        assert_eq!(geodiam_diameter_framework(g, ptr::null(), &mut fr), GeodiamStatus::Disconnected);
        assert!(last_error().contains("disconnected"));
        let mut ir = GeodiamIfubResult::default();
        assert_eq!(geodiam_diameter_ifub(g, 0, &mut ir), GeodiamStatus::Disconnected);
        geodiam_graph_free(g);

        let missing = CString::new("/nonexistent/graph.txt").unwrap();
        assert_eq!(geodiam_graph_read(missing.as_ptr(), &mut g), GeodiamStatus::Io);
        let msg = CStr::from_ptr(geodiam_status_message(GeodiamStatus::BudgetExceeded));
        assert_eq!(msg.to_str().unwrap(), "budget exceeded");
    }
}

#[test]
fn budget_cap_maps_to_status() {
    let mut g = ptr::null_mut();
    unsafe { geodiam_graph_generate(400, 0.25, GeodiamSpace::Torus, 3, &mut g) };
    let mut opts = geodiam_framework_options_default();
    opts.budget_cap = 100;
    let mut fr = GeodiamFrameworkResult::default();
    unsafe {
        assert_eq!(geodiam_diameter_framework(g, &opts, &mut fr), GeodiamStatus::BudgetExceeded);
        geodiam_graph_free(g);
    }
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("g.txt").to_str().unwrap()).unwrap();
    let g = grid(4, GeodiamSpace::Square);
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(geodiam_graph_write(g, path.as_ptr()), GeodiamStatus::Ok);
        assert_eq!(geodiam_graph_read(path.as_ptr(), &mut h), GeodiamStatus::Ok);
        assert_eq!(geodiam_graph_num_edges(h), geodiam_graph_num_edges(g));
    }
    assert_eq!(all_three(h), [6, 6, 6]);
    unsafe {
        geodiam_graph_free(g);
        geodiam_graph_free(h);
    }
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/geodiam.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "geodiam_graph_generate",
        "geodiam_graph_from_points",
        "geodiam_graph_free",
        "geodiam_diameter_framework",
        "geodiam_diameter_ifub",
        "geodiam_diameter_naive",
        "geodiam_last_error",
        "GEODIAM_STATUS_DISCONNECTED",
        "typedef struct GeodiamGraph GeodiamGraph;",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "geodiam.h"

int main(void) {
    double xy[18];
    for (int i = 0; i < 9; i++) { xy[2 * i] = i % 3; xy[2 * i + 1] = i / 3; }
    GeodiamGraph *g = NULL;
    if (geodiam_graph_from_points(GEODIAM_SPACE_SQUARE, 3.0, xy, 9, 1.0, &g) != GEODIAM_STATUS_OK) return 10;
    GeodiamFrameworkOptions opts = geodiam_framework_options_default();
    GeodiamFrameworkResult fr;
    GeodiamIfubResult ir;
    uint32_t nd = 0;
    if (geodiam_diameter_framework(g, &opts, &fr) != GEODIAM_STATUS_OK) return 11;
    if (geodiam_diameter_ifub(g, -1, &ir) != GEODIAM_STATUS_OK) return 12;
    if (geodiam_diameter_naive(g, &nd, NULL) != GEODIAM_STATUS_OK) return 13;
    printf("%u %u %u\n", fr.diameter, ir.diameter, nd);
    geodiam_graph_free(g);
    return 0;
}
"#;

/// Compiles and runs a C program against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    assert!(cc.status.success());
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libgeodiam_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "4 4 4");
}
