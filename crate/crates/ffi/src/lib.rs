//! C ABI for `geodiam`.
//!
//! Graphs are opaque handles created by one of the `geodiam_graph_*`
//! constructors and released with [`geodiam_graph_free`]. Every fallible
//! function returns a [`GeodiamStatus`]; on failure a message is available
//! from [`geodiam_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use geodiam::diameter::{framework_diameter, DiameterConfig, DiameterError, LeafLevel, SearchStrategy};
use geodiam::geometry::{Point, SpaceKind};
use geodiam::graph::{naive_diameter_counted, GeometricGraph, GraphError};
use geodiam::graphgen::{from_points, read_graph, sample_rgg, write_graph, RggParams};
use geodiam::ifub::{ifub, CenterStrategy};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeodiamStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Disconnected = 3,
    BudgetExceeded = 4,
    Io = 5,
    Parse = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeodiamSpace {
    Square = 0,
    Torus = 1,
}

impl From<GeodiamSpace> for SpaceKind {
    fn from(s: GeodiamSpace) -> Self {
        match s {
            GeodiamSpace::Square => SpaceKind::Square,
            GeodiamSpace::Torus => SpaceKind::Torus,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeodiamStrategy {
    Refined = 0,
    SizeDoubling = 1,
}

/// Opaque graph handle.
pub struct GeodiamGraph {
    inner: GeometricGraph,
}

/// Options for [`geodiam_diameter_framework`]. Start from
/// [`geodiam_framework_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodiamFrameworkOptions {
    /// Quadtree leaf level, or -1 to derive it from `c_leaf`.
    pub leaf_level: i32,
    pub c_leaf: f64,
    pub strategy: GeodiamStrategy,
    /// Fixed block size limit, or 0 for none.
    pub fixed_k: u64,
    /// Largest work budget, or 0 for none.
    pub budget_cap: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GeodiamFrameworkResult {
    pub diameter: u32,
    pub leaf_level: u32,
    pub max_leaf_size: u64,
    pub decide_calls: u64,
    pub direct_pairs: u64,
    pub overlay_pairs: u64,
    pub oracle_entries: u64,
    pub oracle_work: u64,
    pub total_work: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GeodiamIfubResult {
    pub diameter: u32,
    pub center: u64,
    pub fringe_bfs: u64,
    pub total_bfs: u64,
    pub work: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn fail(status: GeodiamStatus, msg: impl Into<String>) -> GeodiamStatus {
    set_error(msg);
    status
}

fn diameter_status(e: &DiameterError) -> GeodiamStatus {
    match e {
        DiameterError::Graph(GraphError::Disconnected { .. }) => GeodiamStatus::Disconnected,
        DiameterError::BudgetCap { .. } | DiameterError::Oracle(_) => GeodiamStatus::BudgetExceeded,
        DiameterError::Internal(_) => GeodiamStatus::Internal,
        _ => GeodiamStatus::InvalidArgument,
    }
}

fn graph_status(e: &GraphError) -> GeodiamStatus {
    match e {
        GraphError::Disconnected { .. } => GeodiamStatus::Disconnected,
        _ => GeodiamStatus::InvalidArgument,
    }
}

/// Runs `f`, turning panics into [`GeodiamStatus::Internal`].
fn guarded(f: impl FnOnce() -> GeodiamStatus) -> GeodiamStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(GeodiamStatus::Internal, "panic inside geodiam"),
    }
}

unsafe fn graph_ref<'a>(g: *const GeodiamGraph) -> Option<&'a GeometricGraph> {
    g.as_ref().map(|h| &h.inner)
}

unsafe fn emit(g: GeometricGraph, out: *mut *mut GeodiamGraph) {
    *out = Box::into_raw(Box::new(GeodiamGraph { inner: g }));
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn geodiam_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread. Valid until the next
/// call into the library from the same thread.
#[no_mangle]
pub extern "C" fn geodiam_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn geodiam_status_message(status: GeodiamStatus) -> *const c_char {
    let s: &'static str = match status {
        GeodiamStatus::Ok => "ok\0",
        GeodiamStatus::NullPointer => "null pointer argument\0",
        GeodiamStatus::InvalidArgument => "invalid argument\0",
        GeodiamStatus::Disconnected => "graph is disconnected\0",
        GeodiamStatus::BudgetExceeded => "budget exceeded\0",
        GeodiamStatus::Io => "io error\0",
        GeodiamStatus::Parse => "parse error\0",
        GeodiamStatus::Internal => "internal error\0",
    };
    s.as_ptr().cast()
}

/// Samples `n` uniform points on a square or torus of side `√n` and joins
/// pairs at distance at most `n^rho`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn geodiam_graph_generate(
    n: u64,
    rho: f64,
    space: GeodiamSpace,
    seed: u64,
    out: *mut *mut GeodiamGraph,
) -> GeodiamStatus {
    guarded(|| {
        if out.is_null() {
            return fail(GeodiamStatus::NullPointer, "out is null");
        }
        match sample_rgg(&RggParams::with_exponent(n as usize, rho, space.into(), seed)) {
            Ok(g) => {
                emit(g, out);
                GeodiamStatus::Ok
            }
            Err(e) => fail(GeodiamStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Builds a geometric graph from `n` points given as `xy[2i], xy[2i+1]`.
///
/// # Safety
/// `xy` must point to `2n` readable doubles and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn geodiam_graph_from_points(
    space: GeodiamSpace,
    side: f64,
    xy: *const f64,
    n: u64,
    r: f64,
    out: *mut *mut GeodiamGraph,
) -> GeodiamStatus {
    guarded(|| {
        if out.is_null() || (xy.is_null() && n > 0) {
            return fail(GeodiamStatus::NullPointer, "xy or out is null");
        }
        let coords = if n == 0 { &[][..] } else { std::slice::from_raw_parts(xy, 2 * n as usize) };
        let pts = coords.chunks_exact(2).map(|c| Point::new(c[0], c[1])).collect();
        match from_points(space.into(), side, pts, r) {
            Ok(g) => {
                emit(g, out);
                GeodiamStatus::Ok
            }
            Err(e) => fail(GeodiamStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Reads a graph file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable storage.
#[no_mangle]
pub unsafe extern "C" fn geodiam_graph_read(path: *const c_char, out: *mut *mut GeodiamGraph) -> GeodiamStatus {
    guarded(|| {
        if path.is_null() || out.is_null() {
            return fail(GeodiamStatus::NullPointer, "path or out is null");
        }
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            return fail(GeodiamStatus::InvalidArgument, "path is not UTF-8");
        };
        match read_graph(path) {
            Ok(g) => {
                emit(g, out);
                GeodiamStatus::Ok
            }
            Err(e @ geodiam::graphgen::ParseError::Io(_)) => fail(GeodiamStatus::Io, e.to_string()),
            Err(e) => fail(GeodiamStatus::Parse, e.to_string()),
        }
    })
}

/// Writes a graph file.
///
/// # Safety
/// `g` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn geodiam_graph_write(g: *const GeodiamGraph, path: *const c_char) -> GeodiamStatus {
    guarded(|| {
        let (Some(g), false) = (graph_ref(g), path.is_null()) else {
            return fail(GeodiamStatus::NullPointer, "graph or path is null");
        };
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            return fail(GeodiamStatus::InvalidArgument, "path is not UTF-8");
        };
        match write_graph(g, path) {
            Ok(()) => GeodiamStatus::Ok,
            Err(e) => fail(GeodiamStatus::Io, e.to_string()),
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `g` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn geodiam_graph_free(g: *mut GeodiamGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Vertex count, 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn geodiam_graph_num_vertices(g: *const GeodiamGraph) -> u64 {
    graph_ref(g).map_or(0, |g| g.n() as u64)
}

/// Edge count, 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn geodiam_graph_num_edges(g: *const GeodiamGraph) -> u64 {
    graph_ref(g).map_or(0, |g| g.m() as u64)
}

/// 1 if connected, 0 otherwise or for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn geodiam_graph_is_connected(g: *const GeodiamGraph) -> i32 {
    graph_ref(g).map_or(0, |g| i32::from(g.is_connected()))
}

#[no_mangle]
pub extern "C" fn geodiam_framework_options_default() -> GeodiamFrameworkOptions {
    let d = DiameterConfig::default();
    let c_leaf = match d.leaf_level {
        LeafLevel::Auto { c_leaf } => c_leaf,
        LeafLevel::Fixed(_) => geodiam::diameter::FRAMEWORK_C_LEAF,
    };
    GeodiamFrameworkOptions { leaf_level: -1, c_leaf, strategy: GeodiamStrategy::Refined, fixed_k: 0, budget_cap: 0 }
}

/// Exact diameter with the separator-hierarchy algorithm.
///
/// # Safety
/// `g` must be a live handle, `opts` null (defaults) or readable, and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn geodiam_diameter_framework(
    g: *const GeodiamGraph,
    opts: *const GeodiamFrameworkOptions,
    out: *mut GeodiamFrameworkResult,
) -> GeodiamStatus {
    guarded(|| {
        let Some(g) = graph_ref(g) else {
            return fail(GeodiamStatus::NullPointer, "graph is null");
        };
        if out.is_null() {
            return fail(GeodiamStatus::NullPointer, "out is null");
        }
        let o = opts.as_ref().copied().unwrap_or_else(|| geodiam_framework_options_default());
        let leaf_level = match u32::try_from(o.leaf_level) {
            Ok(l) => LeafLevel::Fixed(l),
            Err(_) if o.c_leaf.is_finite() && o.c_leaf > 0.0 => LeafLevel::Auto { c_leaf: o.c_leaf },
            Err(_) => return fail(GeodiamStatus::InvalidArgument, "c_leaf must be positive"),
        };
        let cfg = DiameterConfig {
            leaf_level,
            strategy: match o.strategy {
                GeodiamStrategy::Refined => SearchStrategy::Refined,
                GeodiamStrategy::SizeDoubling => SearchStrategy::SizeDoubling,
            },
            fixed_k: (o.fixed_k > 0).then_some(o.fixed_k as usize),
            budget_cap: (o.budget_cap > 0).then_some(o.budget_cap),
            ..Default::default()
        };
        match framework_diameter(g, &cfg) {
            Ok(r) => {
                *out = GeodiamFrameworkResult {
                    diameter: r.diameter,
                    leaf_level: r.leaf_level,
                    max_leaf_size: r.max_leaf_size as u64,
                    decide_calls: r.calls.len() as u64,
                    direct_pairs: r.direct_pairs() as u64,
                    overlay_pairs: r.overlay_pairs() as u64,
                    oracle_entries: r.oracle_entries,
                    oracle_work: r.oracle_work,
                    total_work: r.total_work,
                };
                GeodiamStatus::Ok
            }
            Err(e) => fail(diameter_status(&e), e.to_string()),
        }
    })
}

/// Exact diameter with iFUB. A negative `center` selects the double-sweep
/// center started at vertex 0.
///
/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn geodiam_diameter_ifub(
    g: *const GeodiamGraph,
    center: i64,
    out: *mut GeodiamIfubResult,
) -> GeodiamStatus {
    guarded(|| {
        let Some(g) = graph_ref(g) else {
            return fail(GeodiamStatus::NullPointer, "graph is null");
        };
        if out.is_null() {
            return fail(GeodiamStatus::NullPointer, "out is null");
        }
        let strategy = match usize::try_from(center) {
            Ok(c) => CenterStrategy::Fixed(c),
            Err(_) => CenterStrategy::TwoSweep(0),
        };
        match ifub(g, strategy) {
            Ok((d, t)) => {
                *out = GeodiamIfubResult {
                    diameter: d,
                    center: t.center as u64,
                    fringe_bfs: t.fringe_bfs as u64,
                    total_bfs: t.total_bfs as u64,
                    work: t.work,
                };
                GeodiamStatus::Ok
            }
            Err(e) => fail(graph_status(&e), e.to_string()),
        }
    })
}

/// Exact diameter by BFS from every vertex. `work` may be null.
///
/// # Safety
/// `g` must be a live handle, `diameter` writable, `work` null or writable.
#[no_mangle]
pub unsafe extern "C" fn geodiam_diameter_naive(
    g: *const GeodiamGraph,
    diameter: *mut u32,
    work: *mut u64,
) -> GeodiamStatus {
    guarded(|| {
        let Some(g) = graph_ref(g) else {
            return fail(GeodiamStatus::NullPointer, "graph is null");
        };
        if diameter.is_null() {
            return fail(GeodiamStatus::NullPointer, "diameter is null");
        }
        match naive_diameter_counted(g) {
            Ok((d, w)) => {
                *diameter = d;
                if !work.is_null() {
                    *work = w;
                }
                GeodiamStatus::Ok
            }
            Err(e) => fail(graph_status(&e), e.to_string()),
        }
    })
}
