//! Comparative studies: reconstruction, normal and force errors against
//! reference jets, shape-parameter sweeps, and wallclock benchmarks.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use nalgebra::{DMatrix, Vector2, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::{
    sph_data_operator, sph_degree_for, sph_eval, trig_eval, trig_fit, SphSolver, TrigResampler,
};
use crate::mechanics::{fiber_force_2d, frame_2d, frame_3d, surface_tension_force, MaterialParams};
use crate::points::{
    equispaced_circle, fibonacci_sphere, load_point_set, NodeSet2D, NodeSet3D, PointCache, PointFormat, PointSetFile,
};
use crate::pwl::{pwl_normals_2d, spring_force_2d, triangulate_sphere_like, vertex_normals_angle_weighted, ClosedPolyline};
use crate::rbf::{
    epsilon_limit_gap, rbf_data_operator_2d, rbf_eval_2d, rbf_eval_3d, rbf_fit_2d, EpsilonGap, RadialKernel,
    RbfSolver3D,
};
use crate::shapes::{
    reference_jet_2d, reference_jet_3d, Jet2D, Jet3D, NamedObject, Partial, Preset, TestObject2D, TestObject3D,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Pwl,
    Fourier,
    Rbf,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Pwl, Model::Fourier, Model::Rbf];

    pub fn name(self) -> &'static str {
        match self {
            Model::Pwl => "pwl",
            Model::Fourier => "fourier",
            Model::Rbf => "rbf",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Model::ALL
            .into_iter()
            .find(|m| m.name() == lower)
            .ok_or_else(|| Error::invalid(format!("unknown model `{s}` (expected pwl, fourier or rbf)")))
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    Shape,
    Normal,
    Force,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Shape => "shape",
            Quantity::Normal => "normal",
            Quantity::Force => "force",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "shape" => Ok(Quantity::Shape),
            "normal" => Ok(Quantity::Normal),
            "force" => Ok(Quantity::Force),
            _ => Err(Error::invalid(format!("unknown quantity `{s}`"))),
        }
    }
}

/// Where 3D data sites come from.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeSource {
    MinimalEnergy,
    Fibonacci,
    /// Directory holding `md_<n>.txt` files (angle format). Missing sizes fall
    /// back to minimal energy sets.
    MaximalDeterminant(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub object: NamedObject,
    pub model: Model,
    pub n_list: Vec<usize>,
    /// Number of sample sites (and of PWL IB points).
    pub m: usize,
    /// RBF kernel; `None` picks the per-object default (ε = 1 for custom objects).
    pub kernel: Option<RadialKernel>,
    pub seed: u64,
    pub nodes: NodeSource,
    pub cache_dir: PathBuf,
    pub material: MaterialParams,
    pub keep_site_errors: bool,
}

pub fn default_n_list(dimension: usize) -> Vec<usize> {
    if dimension == 2 {
        (8..=56).step_by(8).collect()
    } else {
        vec![16, 36, 64, 121, 256, 529]
    }
}

pub fn default_m(dimension: usize) -> usize {
    if dimension == 2 {
        100
    } else {
        1024
    }
}

/// MQ in 2D, IMQ in 3D, with per-object shape parameters.
pub fn default_kernel(object: Preset) -> RadialKernel {
    let (mq, eps) = match object {
        Preset::Object1_2D => (true, 0.9),
        Preset::Object2_2D => (true, 3.6),
        Preset::Object1_3D => (false, 0.9),
        Preset::Object2_3D => (false, 1.5),
    };
    if mq {
        RadialKernel::mq(eps).expect("positive default epsilon")
    } else {
        RadialKernel::imq(eps).expect("positive default epsilon")
    }
}

impl StudyConfig {
    pub fn new(object: impl Into<NamedObject>, model: Model) -> Self {
        let object = object.into();
        let d = object.dimension();
        StudyConfig {
            object,
            model,
            n_list: default_n_list(d),
            m: default_m(d),
            kernel: None,
            seed: 0,
            nodes: NodeSource::MinimalEnergy,
            cache_dir: PointCache::default_dir(),
            material: MaterialParams::default(),
            keep_site_errors: false,
        }
    }

    pub fn dimension(&self) -> usize {
        self.object.dimension()
    }

    pub fn kernel(&self) -> RadialKernel {
        self.kernel.unwrap_or_else(|| match self.object.preset {
            Some(p) => default_kernel(p),
            None if self.dimension() == 2 => RadialKernel::mq(1.0).expect("positive epsilon"),
            None => RadialKernel::imq(1.0).expect("positive epsilon"),
        })
    }

    /// Shape parameter reported in output rows (RBF only).
    pub fn epsilon(&self) -> Option<f64> {
        (self.model == Model::Rbf).then(|| self.kernel().epsilon)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::config("n", "node count list is empty"));
        }
        let max_n = *self.n_list.iter().max().unwrap_or(&0);
        if self.m < max_n {
            return Err(Error::config(
                "m",
                format!("sample count {} is smaller than the largest node count {max_n}", self.m),
            ));
        }
        if self.dimension() == 2 {
            if self.m < 4 || self.m % 2 != 0 {
                return Err(Error::config("m", format!("2D sample count must be even and >= 4, got {}", self.m)));
            }
            if let Some(n) = self.n_list.iter().find(|&&n| n < 4 || n % 2 != 0) {
                return Err(Error::config("n", format!("2D node counts must be even and >= 4, got {n}")));
            }
        } else {
            if self.m < 4 {
                return Err(Error::config("m", format!("3D sample count must be >= 4, got {}", self.m)));
            }
            if let Some(n) = self.n_list.iter().find(|&&n| n < 4) {
                return Err(Error::config("n", format!("3D node counts must be >= 4, got {n}")));
            }
            if self.model == Model::Fourier {
                if let Some(n) = self.n_list.iter().find(|&&n| sph_degree_for(n).is_none()) {
                    return Err(Error::config(
                        "n",
                        format!("spherical harmonic node counts must be perfect squares, got {n}"),
                    ));
                }
            }
        }
        Ok(())
    }

    fn cache(&self) -> PointCache {
        PointCache::new(&self.cache_dir)
    }
}

/// `max_j ‖approx_j − truth_j‖₂`.
pub fn max_two_norm_error<const D: usize>(
    approx: &[nalgebra::SVector<f64, D>],
    truth: &[nalgebra::SVector<f64, D>],
) -> Result<f64> {
    if approx.len() != truth.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            actual: approx.len(),
        });
    }
    Ok(approx.iter().zip(truth).map(|(a, t)| (a - t).norm()).fold(0.0, f64::max))
}

fn site_errors<const D: usize>(
    approx: &[nalgebra::SVector<f64, D>],
    truth: &[nalgebra::SVector<f64, D>],
) -> Vec<f64> {
    approx.iter().zip(truth).map(|(a, t)| (a - t).norm()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub dim: usize,
    pub object: String,
    pub model: Model,
    /// Data sites for parametric models; IB points for PWL.
    pub n: usize,
    pub m: usize,
    pub epsilon: Option<f64>,
    pub quantity: Quantity,
    pub max_error: Option<f64>,
    pub cond_estimate: Option<f64>,
    /// `ok`, or `error: <kind>` when the fit or evaluation failed.
    pub status: String,
    pub site_errors: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
}

impl ErrorReport {
    pub fn get(&self, model: Model, n: usize, quantity: Quantity) -> Option<&ErrorRow> {
        self.rows
            .iter()
            .find(|r| r.model == model && r.n == n && r.quantity == quantity)
    }

    /// `max_error` of the matching row, if it succeeded.
    pub fn error(&self, model: Model, n: usize, quantity: Quantity) -> Option<f64> {
        self.get(model, n, quantity).and_then(|r| r.max_error)
    }
}

/// Sample sites and exact geometry of a test object.
pub struct Truth2D {
    pub sites: NodeSet2D,
    pub x: Vec<Vector2<f64>>,
    pub normal: Vec<Vector2<f64>>,
    pub force: Vec<Vector2<f64>>,
}

impl Truth2D {
    pub fn new(object: &TestObject2D, m: usize, material: &MaterialParams) -> Result<Self> {
        let sites = equispaced_circle(m)?;
        let jets: Vec<Jet2D> = sites.angles().iter().map(|&l| reference_jet_2d(object, l).jet).collect();
        let normal = jets.iter().map(|j| frame_2d(j).map(|f| f.normal)).collect::<Result<_>>()?;
        Ok(Truth2D {
            x: sites.angles().iter().map(|&l| object.eval(l)).collect(),
            normal,
            force: jets.iter().map(|j| fiber_force_2d(j, material)).collect(),
            sites,
        })
    }
}

pub struct Truth3D {
    pub sites: NodeSet3D,
    pub x: Vec<Vector3<f64>>,
    pub normal: Vec<Vector3<f64>>,
    pub force: Vec<Vector3<f64>>,
}

impl Truth3D {
    pub fn new(object: &TestObject3D, sites: NodeSet3D, material: &MaterialParams) -> Result<Self> {
        let jets: Vec<Jet3D> = sites
            .points()
            .par_iter()
            .map(|p| reference_jet_3d(object, p.lambda, p.theta).jet)
            .collect();
        let normal = jets.iter().map(|j| frame_3d(j).map(|f| f.normal)).collect::<Result<_>>()?;
        let force = jets
            .iter()
            .map(|j| surface_tension_force(j, material))
            .collect::<Result<_>>()?;
        Ok(Truth3D {
            x: sites.points().iter().map(|p| object.eval(p.lambda, p.theta)).collect(),
            normal,
            force,
            sites,
        })
    }
}

/// Sample sites for 3D studies: a minimal energy set of size `m`.
pub fn sample_sites_3d(cfg: &StudyConfig) -> Result<NodeSet3D> {
    cfg.cache().minimal_energy(cfg.m, cfg.seed)
}

/// Data sites for a 3D fit with `n` nodes.
pub fn data_sites_3d(cfg: &StudyConfig, n: usize) -> Result<NodeSet3D> {
    match &cfg.nodes {
        NodeSource::MinimalEnergy => cfg.cache().minimal_energy(n, cfg.seed),
        NodeSource::Fibonacci => fibonacci_sphere(n),
        NodeSource::MaximalDeterminant(dir) => {
            let path = dir.join(format!("md_{n}.txt"));
            if path.exists() {
                let set = load_point_set(&PointSetFile {
                    path,
                    format: PointFormat::Angles,
                    maximal_determinant: true,
                })?;
                if set.len() != n {
                    return Err(Error::Validation(format!(
                        "md_{n}.txt holds {} points",
                        set.len()
                    )));
                }
                Ok(set)
            } else {
                log::warn!("no maximal determinant set for n={n}; using minimal energy nodes");
                cfg.cache().minimal_energy(n, cfg.seed)
            }
        }
    }
}

fn failure_status(e: &Error) -> String {
    format!("error: {}", e.kind())
}

fn failure_condition(e: &Error) -> Option<f64> {
    match e {
        Error::IllConditioned { condition, .. } => Some(*condition),
        _ => None,
    }
}

struct RowBuilder<'a> {
    cfg: &'a StudyConfig,
    n: usize,
    epsilon: Option<f64>,
}

impl RowBuilder<'_> {
    fn row(&self, quantity: Quantity, errors: Result<Vec<f64>>, cond: Option<f64>) -> ErrorRow {
        let (max_error, status, site) = match errors {
            Ok(e) => {
                let max = e.iter().copied().fold(0.0, f64::max);
                let site = self.cfg.keep_site_errors.then_some(e);
                (Some(max), "ok".to_string(), site)
            }
            Err(e) => (None, failure_status(&e), None),
        };
        ErrorRow {
            dim: self.cfg.dimension(),
            object: self.cfg.object.name.clone(),
            model: self.cfg.model,
            n: self.n,
            m: self.cfg.m,
            epsilon: self.epsilon,
            quantity,
            max_error,
            cond_estimate: cond,
            status,
            site_errors: site,
        }
    }

    fn failed(&self, quantities: &[Quantity], e: &Error) -> Vec<ErrorRow> {
        quantities
            .iter()
            .map(|&q| {
                let mut r = self.row(q, Ok(vec![]), failure_condition(e));
                r.max_error = None;
                r.status = failure_status(e);
                r
            })
            .collect()
    }
}

const ALL_QUANTITIES: [Quantity; 3] = [Quantity::Shape, Quantity::Normal, Quantity::Force];

/// Values of orders 0, 1, 2 of a fitted circle model at the sample sites.
fn jets_from_orders(v0: &[Vector2<f64>], v1: &[Vector2<f64>], v2: &[Vector2<f64>]) -> Vec<Jet2D> {
    (0..v0.len())
        .map(|i| Jet2D {
            x: v0[i],
            d1: v1[i],
            d2: v2[i],
        })
        .collect()
}

fn errors_2d(rb: &RowBuilder, jets: &[Jet2D], truth: &Truth2D, cond: Option<f64>) -> Vec<ErrorRow> {
    let material = &rb.cfg.material;
    let x: Vec<Vector2<f64>> = jets.iter().map(|j| j.x).collect();
    let normals: Result<Vec<Vector2<f64>>> = jets.iter().map(|j| frame_2d(j).map(|f| f.normal)).collect();
    let forces: Vec<Vector2<f64>> = jets.iter().map(|j| fiber_force_2d(j, material)).collect();
    vec![
        rb.row(Quantity::Shape, Ok(site_errors(&x, &truth.x)), cond),
        rb.row(Quantity::Normal, normals.map(|n| site_errors(&n, &truth.normal)), cond),
        rb.row(Quantity::Force, Ok(site_errors(&forces, &truth.force)), cond),
    ]
}

fn errors_3d(rb: &RowBuilder, partials: [Vec<Vector3<f64>>; 6], truth: &Truth3D, cond: Option<f64>) -> Vec<ErrorRow> {
    let material = &rb.cfg.material;
    let jets: Vec<Jet3D> = (0..partials[0].len())
        .map(|i| Jet3D::from_partials(std::array::from_fn(|k| partials[k][i])))
        .collect();
    let normals: Result<Vec<Vector3<f64>>> = jets.iter().map(|j| frame_3d(j).map(|f| f.normal)).collect();
    let forces: Result<Vec<Vector3<f64>>> = jets.iter().map(|j| surface_tension_force(j, material)).collect();
    vec![
        rb.row(Quantity::Shape, Ok(site_errors(&partials[0], &truth.x)), cond),
        rb.row(Quantity::Normal, normals.map(|n| site_errors(&n, &truth.normal)), cond),
        rb.row(Quantity::Force, forces.map(|f| site_errors(&f, &truth.force)), cond),
    ]
}

fn study_row_2d(cfg: &StudyConfig, object: &TestObject2D, truth: &Truth2D, n: usize) -> Vec<ErrorRow> {
    let rb = RowBuilder {
        cfg,
        n,
        epsilon: cfg.epsilon(),
    };
    let run = || -> Result<(Vec<Jet2D>, Option<f64>)> {
        let nodes = equispaced_circle(n)?;
        let (dx, dy): (Vec<f64>, Vec<f64>) = nodes
            .angles()
            .iter()
            .map(|&l| {
                let p = object.eval(l);
                (p.x, p.y)
            })
            .unzip();
        match cfg.model {
            Model::Fourier => {
                let p = trig_fit(&nodes, &dx, &dy)?;
                let v: Vec<Vec<Vector2<f64>>> =
                    (0..3).map(|o| trig_eval(&p, &truth.sites, o)).collect::<Result<_>>()?;
                Ok((jets_from_orders(&v[0], &v[1], &v[2]), None))
            }
            Model::Rbf => {
                let s = rbf_fit_2d(&nodes, &dx, &dy, cfg.kernel())?;
                let v: Vec<Vec<Vector2<f64>>> =
                    (0..3).map(|o| rbf_eval_2d(&s, &truth.sites, o)).collect::<Result<_>>()?;
                Ok((jets_from_orders(&v[0], &v[1], &v[2]), Some(s.condition)))
            }
            Model::Pwl => unreachable!("PWL rows are built separately"),
        }
    };
    match run() {
        Ok((jets, cond)) => errors_2d(&rb, &jets, truth, cond),
        Err(e) => rb.failed(&ALL_QUANTITIES, &e),
    }
}

/// PWL normals and spring forces at `m` IB points on the object. Spring
/// forces are divided by `Δλ²` so they approximate `K0 ∂²x/∂λ²`.
fn pwl_rows_2d(cfg: &StudyConfig, truth: &Truth2D) -> Vec<ErrorRow> {
    let rb = RowBuilder {
        cfg,
        n: cfg.m,
        epsilon: None,
    };
    let curve = match ClosedPolyline::new(truth.x.clone()) {
        Ok(c) => c,
        Err(e) => return rb.failed(&[Quantity::Normal, Quantity::Force], &e),
    };
    let dl = std::f64::consts::TAU / cfg.m as f64;
    let forces: Vec<Vector2<f64>> = spring_force_2d(&curve, cfg.material.k0)
        .into_iter()
        .map(|f| f / (dl * dl))
        .collect();
    vec![
        rb.row(
            Quantity::Normal,
            pwl_normals_2d(&curve).map(|n| site_errors(&n, &truth.normal)),
            None,
        ),
        rb.row(Quantity::Force, Ok(site_errors(&forces, &truth.force)), None),
    ]
}

fn study_row_3d(cfg: &StudyConfig, object: &TestObject3D, truth: &Truth3D, n: usize) -> Vec<ErrorRow> {
    let rb = RowBuilder {
        cfg,
        n,
        epsilon: cfg.epsilon(),
    };
    let run = || -> Result<([Vec<Vector3<f64>>; 6], f64)> {
        let nodes = data_sites_3d(cfg, n)?;
        let data: Vec<Vector3<f64>> = nodes.points().iter().map(|p| object.eval(p.lambda, p.theta)).collect();
        let dx: Vec<f64> = data.iter().map(|v| v.x).collect();
        let dy: Vec<f64> = data.iter().map(|v| v.y).collect();
        let dz: Vec<f64> = data.iter().map(|v| v.z).collect();
        match cfg.model {
            Model::Fourier => {
                let degree = sph_degree_for(n).ok_or_else(|| Error::invalid(format!("{n} is not a square")))?;
                let solver = SphSolver::new(&nodes, degree)?;
                let p = solver.fit(&dx, &dy, &dz)?;
                Ok((Partial::ALL.map(|q| sph_eval(&p, &truth.sites, q)), solver.condition()))
            }
            Model::Rbf => {
                let solver = RbfSolver3D::new(&nodes, cfg.kernel())?;
                let s = solver.fit(&dx, &dy, &dz)?;
                Ok((Partial::ALL.map(|q| rbf_eval_3d(&s, &truth.sites, q)), solver.condition()))
            }
            Model::Pwl => unreachable!("PWL rows are built separately"),
        }
    };
    match run() {
        Ok((partials, cond)) => errors_3d(&rb, partials, truth, Some(cond)),
        Err(e) => rb.failed(&ALL_QUANTITIES, &e),
    }
}

/// PWL normals at the `m` IB points. Forces are not compared in 3D: the
/// spring model has no continuum counterpart.
fn pwl_rows_3d(cfg: &StudyConfig, truth: &Truth3D) -> Vec<ErrorRow> {
    let rb = RowBuilder {
        cfg,
        n: cfg.m,
        epsilon: None,
    };
    let normals = triangulate_sphere_like(&truth.x).and_then(|mesh| vertex_normals_angle_weighted(&mesh));
    vec![rb.row(
        Quantity::Normal,
        normals.map(|n| site_errors(&n, &truth.normal)),
        None,
    )]
}

/// Error of one model against the reference geometry for every `N`.
///
/// Fit failures are recorded in the row status and do not abort the study.
/// PWL produces a single set of rows at `m` IB points.
pub fn convergence_study(cfg: &StudyConfig) -> Result<ErrorReport> {
    cfg.validate()?;
    let rows = if cfg.dimension() == 2 {
        let object = *cfg.object.curve()?;
        let truth = Truth2D::new(&object, cfg.m, &cfg.material)?;
        if cfg.model == Model::Pwl {
            pwl_rows_2d(cfg, &truth)
        } else {
            cfg.n_list
                .par_iter()
                .map(|&n| study_row_2d(cfg, &object, &truth, n))
                .collect::<Vec<_>>()
                .concat()
        }
    } else {
        let object = *cfg.object.surface()?;
        let truth = Truth3D::new(&object, sample_sites_3d(cfg)?, &cfg.material)?;
        if cfg.model == Model::Pwl {
            pwl_rows_3d(cfg, &truth)
        } else {
            // Generate node sets up front so parallel rows never race on the cache.
            for &n in &cfg.n_list {
                if let Err(e) = data_sites_3d(cfg, n) {
                    log::warn!("node set n={n}: {e}");
                }
            }
            cfg.n_list
                .par_iter()
                .map(|&n| study_row_3d(cfg, &object, &truth, n))
                .collect::<Vec<_>>()
                .concat()
        }
    };
    Ok(ErrorReport { rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub object: String,
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    /// `None` when the fit was refused.
    pub max_error: Option<f64>,
    pub cond_estimate: Option<f64>,
}

/// Shape error of the RBF model over a grid of shape parameters, for every
/// `N` in the config. The kernel family comes from the config.
pub fn shape_param_sweep(cfg: &StudyConfig, eps: &[f64]) -> Result<Vec<SweepRow>> {
    if eps.is_empty() {
        return Err(Error::config("epsilon", "shape parameter grid is empty"));
    }
    let mut cfg = cfg.clone();
    cfg.model = Model::Rbf;
    cfg.validate()?;
    let family = cfg.kernel().family;
    let kernels: Vec<RadialKernel> = eps.iter().map(|&e| RadialKernel::new(family, e)).collect::<Result<_>>()?;
    let jobs: Vec<(usize, RadialKernel)> = cfg
        .n_list
        .iter()
        .flat_map(|&n| kernels.iter().map(move |&k| (n, k)))
        .collect();
    let row_of = |n: usize, k: RadialKernel, r: &ErrorRow| SweepRow {
        object: cfg.object.name.clone(),
        n,
        m: cfg.m,
        epsilon: k.epsilon,
        max_error: r.max_error,
        cond_estimate: r.cond_estimate,
    };
    if cfg.dimension() == 2 {
        let object = *cfg.object.curve()?;
        let truth = Truth2D::new(&object, cfg.m, &cfg.material)?;
        Ok(jobs
            .par_iter()
            .map(|&(n, k)| {
                let mut c = cfg.clone();
                c.kernel = Some(k);
                row_of(n, k, &study_row_2d(&c, &object, &truth, n)[0])
            })
            .collect())
    } else {
        let object = *cfg.object.surface()?;
        let truth = Truth3D::new(&object, sample_sites_3d(&cfg)?, &cfg.material)?;
        for &n in &cfg.n_list {
            data_sites_3d(&cfg, n)?;
        }
        Ok(jobs
            .par_iter()
            .map(|&(n, k)| {
                let mut c = cfg.clone();
                c.kernel = Some(k);
                row_of(n, k, &shape_row_3d(&c, &object, &truth, n))
            })
            .collect())
    }
}

/// Shape-only 3D row (skips the derivative partials the sweep never uses).
fn shape_row_3d(cfg: &StudyConfig, object: &TestObject3D, truth: &Truth3D, n: usize) -> ErrorRow {
    let rb = RowBuilder {
        cfg,
        n,
        epsilon: cfg.epsilon(),
    };
    let run = || -> Result<(Vec<f64>, f64)> {
        let nodes = data_sites_3d(cfg, n)?;
        let data: Vec<Vector3<f64>> = nodes.points().iter().map(|p| object.eval(p.lambda, p.theta)).collect();
        let col = |f: fn(&Vector3<f64>) -> f64| data.iter().map(f).collect::<Vec<f64>>();
        let solver = RbfSolver3D::new(&nodes, cfg.kernel())?;
        let s = solver.fit(&col(|v| v.x), &col(|v| v.y), &col(|v| v.z))?;
        let vals = rbf_eval_3d(&s, &truth.sites, Partial::Val);
        Ok((site_errors(&vals, &truth.x), solver.condition()))
    };
    match run() {
        Ok((e, cond)) => rb.row(Quantity::Shape, Ok(e), Some(cond)),
        Err(e) => rb.failed(&[Quantity::Shape], &e).remove(0),
    }
}

/// `ε → 0` comparison of the MQ interpolant with the trigonometric
/// interpolant of a 2D object's `x` coordinate on `n` equispaced nodes.
pub fn epsilon_fourier_limit_study(n: usize, object: &TestObject2D, eps: &[f64]) -> Result<Vec<EpsilonGap>> {
    if n > 12 {
        return Err(Error::invalid(format!("epsilon limit study is limited to n <= 12, got {n}")));
    }
    let nodes = equispaced_circle(n)?;
    let data: Vec<f64> = nodes.angles().iter().map(|&l| object.eval(l).x).collect();
    epsilon_limit_gap(&nodes, &data, eps)
}

// ---------------------------------------------------------------------------
// Timing

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub model: Model,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub mean_s: f64,
    pub stddev_s: f64,
    pub median_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimingReport {
    pub rows: Vec<TimingRow>,
}

/// Untimed runs before measurement starts.
pub const WARMUP_RUNS: usize = 3;

fn summarize(samples: &mut [f64]) -> (f64, f64, f64) {
    let k = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / k;
    let stddev = if samples.len() > 1 {
        (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    samples.sort_by(f64::total_cmp);
    let mid = samples.len() / 2;
    let median = if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        0.5 * (samples[mid - 1] + samples[mid])
    };
    (mean, stddev, median)
}

fn time_trials(trials: usize, mut run: impl FnMut()) -> (f64, f64, f64) {
    for _ in 0..WARMUP_RUNS {
        run();
    }
    let mut samples: Vec<f64> = (0..trials)
        .map(|_| {
            let t = Instant::now();
            run();
            t.elapsed().as_secs_f64()
        })
        .collect();
    summarize(&mut samples)
}

/// Stacked data → values operators for every partial a force needs.
fn stacked(blocks: Vec<DMatrix<f64>>) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks[0].ncols();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(&b);
        r += b.nrows();
    }
    out
}

/// Wallclock of one time step for each `N`: coefficients, evaluation,
/// normals and forces for parametric models, normals and forces for PWL.
/// Plans, operator matrices and factorizations are built before timing
/// starts. The 2D Fourier model fits and evaluates by FFT resampling; the
/// other parametric models use a single product with the precomputed
/// data → values operator. Runs on the calling thread.
pub fn timing_bench(cfg: &StudyConfig, trials: usize) -> Result<TimingReport> {
    if trials == 0 {
        return Err(Error::config("trials", "trial count must be at least 1"));
    }
    cfg.validate()?;
    let material = cfg.material;
    let mut rows = Vec::new();
    let ns: Vec<usize> = if cfg.model == Model::Pwl { vec![cfg.m] } else { cfg.n_list.clone() };
    for n in ns {
        let (mean_s, stddev_s, median_s) = if cfg.dimension() == 2 {
            bench_2d(cfg, n, trials, &material)?
        } else {
            bench_3d(cfg, n, trials, &material)?
        };
        rows.push(TimingRow {
            model: cfg.model,
            n,
            m: cfg.m,
            trials,
            mean_s,
            stddev_s,
            median_s,
        });
    }
    Ok(TimingReport { rows })
}

fn bench_2d(cfg: &StudyConfig, n: usize, trials: usize, material: &MaterialParams) -> Result<(f64, f64, f64)> {
    let object = *cfg.object.curve()?;
    let sites = equispaced_circle(cfg.m)?;
    let m = cfg.m;
    if cfg.model == Model::Pwl {
        let pts: Vec<Vector2<f64>> = sites.angles().iter().map(|&l| object.eval(l)).collect();
        let curve = ClosedPolyline::new(pts)?;
        pwl_normals_2d(&curve)?;
        return Ok(time_trials(trials, || {
            let normals = pwl_normals_2d(&curve).expect("checked before timing");
            let forces = spring_force_2d(&curve, material.k0);
            std::hint::black_box((normals, forces));
        }));
    }
    let nodes = equispaced_circle(n)?;
    if cfg.model == Model::Fourier {
        let (x, y): (Vec<f64>, Vec<f64>) =
            nodes.angles().iter().map(|&l| object.eval(l)).map(|p| (p.x, p.y)).unzip();
        let mut resampler = TrigResampler::new(n, m)?;
        let mut normals = vec![Vector2::zeros(); m];
        let mut forces = vec![Vector2::zeros(); m];
        return Ok(time_trials(trials, || {
            resampler.apply(&x, &y).expect("lengths checked");
            for i in 0..m {
                let jet = Jet2D {
                    x: resampler.value(0, i),
                    d1: resampler.value(1, i),
                    d2: resampler.value(2, i),
                };
                normals[i] = frame_2d(&jet).map(|f| f.normal).unwrap_or_default();
                forces[i] = fiber_force_2d(&jet, material);
            }
            std::hint::black_box((&normals, &forces));
        }));
    }
    let ops: Vec<DMatrix<f64>> = (0..3)
        .map(|o| rbf_data_operator_2d(&nodes, &cfg.kernel(), &sites, o).map(|op| op.matrix))
        .collect::<Result<_>>()?;
    let op = stacked(ops);
    let data = DMatrix::from_fn(n, 2, |i, j| object.eval(nodes.angles()[i])[j]);
    let mut values = DMatrix::zeros(3 * m, 2);
    let mut normals = vec![Vector2::zeros(); m];
    let mut forces = vec![Vector2::zeros(); m];
    Ok(time_trials(trials, || {
        op.mul_to(&data, &mut values);
        for i in 0..m {
            let jet = Jet2D {
                x: Vector2::new(values[(i, 0)], values[(i, 1)]),
                d1: Vector2::new(values[(m + i, 0)], values[(m + i, 1)]),
                d2: Vector2::new(values[(2 * m + i, 0)], values[(2 * m + i, 1)]),
            };
            normals[i] = frame_2d(&jet).map(|f| f.normal).unwrap_or_default();
            forces[i] = fiber_force_2d(&jet, material);
        }
        std::hint::black_box((&normals, &forces));
    }))
}

fn bench_3d(cfg: &StudyConfig, n: usize, trials: usize, material: &MaterialParams) -> Result<(f64, f64, f64)> {
    let object = *cfg.object.surface()?;
    let sites = sample_sites_3d(cfg)?;
    let m = cfg.m;
    if cfg.model == Model::Pwl {
        let pts: Vec<Vector3<f64>> = sites.points().iter().map(|p| object.eval(p.lambda, p.theta)).collect();
        let mesh = triangulate_sphere_like(&pts)?;
        vertex_normals_angle_weighted(&mesh)?;
        return Ok(time_trials(trials, || {
            let normals = vertex_normals_angle_weighted(&mesh).expect("checked before timing");
            let forces = crate::pwl::spring_force_3d(&mesh, material.k0);
            std::hint::black_box((normals, forces));
        }));
    }
    let nodes = data_sites_3d(cfg, n)?;
    let op = match cfg.model {
        Model::Fourier => {
            let degree = sph_degree_for(n).ok_or_else(|| Error::invalid(format!("{n} is not a square")))?;
            let solver = SphSolver::new(&nodes, degree)?;
            stacked(Partial::ALL.iter().map(|&q| sph_data_operator(&solver, &sites, q).matrix).collect())
        }
        _ => {
            let solver = RbfSolver3D::new(&nodes, cfg.kernel())?;
            stacked(
                Partial::ALL
                    .iter()
                    .map(|&q| crate::rbf::rbf_data_operator_3d(&solver, &sites, q).matrix)
                    .collect(),
            )
        }
    };
    let data = DMatrix::from_fn(n, 3, |i, j| {
        let p = nodes.points()[i];
        object.eval(p.lambda, p.theta)[j]
    });
    let mut values = DMatrix::zeros(6 * m, 3);
    let mut normals = vec![Vector3::zeros(); m];
    let mut forces = vec![Vector3::zeros(); m];
    Ok(time_trials(trials, || {
        op.mul_to(&data, &mut values);
        for i in 0..m {
            let jet = Jet3D::from_partials(std::array::from_fn(|k| {
                let r = k * m + i;
                Vector3::new(values[(r, 0)], values[(r, 1)], values[(r, 2)])
            }));
            normals[i] = frame_3d(&jet).map(|f| f.normal).unwrap_or_default();
            forces[i] = surface_tension_force(&jet, material).unwrap_or_default();
        }
        std::hint::black_box((&normals, &forces));
    }))
}

// ---------------------------------------------------------------------------
// CSV

pub const CONVERGENCE_HEADER: &str = "dim,object,model,N,M,epsilon,quantity,max_error,cond_estimate,status";
pub const SWEEP_HEADER: &str = "object,N,M,epsilon,max_error,cond_estimate";
pub const TIMING_HEADER: &str = "model,N,M,trials,mean_s,stddev_s,median_s";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_convergence_csv<W: Write>(out: &mut W, rows: &[ErrorRow]) -> std::io::Result<()> {
    writeln!(out, "{CONVERGENCE_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.dim,
            r.object,
            r.model,
            r.n,
            r.m,
            opt(r.epsilon),
            r.quantity.name(),
            opt(r.max_error),
            opt(r.cond_estimate),
            r.status
        )?;
    }
    Ok(())
}

pub fn write_sweep_csv<W: Write>(out: &mut W, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.object,
            r.n,
            r.m,
            r.epsilon,
            opt(r.max_error),
            opt(r.cond_estimate)
        )?;
    }
    Ok(())
}

pub fn write_timing_csv<W: Write>(out: &mut W, rows: &[TimingRow]) -> std::io::Result<()> {
    writeln!(out, "{TIMING_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:e},{:e},{:e}",
            r.model, r.n, r.m, r.trials, r.mean_s, r.stddev_s, r.median_s
        )?;
    }
    Ok(())
}

pub fn write_epsilon_gap_csv<W: Write>(out: &mut W, rows: &[EpsilonGap]) -> std::io::Result<()> {
    writeln!(out, "epsilon,gap,cond_estimate")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.epsilon, opt(r.gap), r.condition)?;
    }
    Ok(())
}
