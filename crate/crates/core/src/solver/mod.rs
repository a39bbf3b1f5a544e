//! Collide-and-stream time stepping on rectangular grids and embedded discs.

pub mod arnoldi;
pub mod modes;
pub mod operator;

use rayon::prelude::*;

use crate::boundary::disc::DiscGeometry;
use crate::boundary::{
    extended_linear, extended_quadratic, halfway_link_value, xi_abb_coefficient, xi_bb_raw, BoundaryDatum,
    HalfwayScheme, Interpolation, LinkSamples, Reflection, Wall, XiParams,
};
use crate::collision::CollisionModel;
use crate::error::{Error, Result};
use crate::lattice::{moment, MomentVector, Stencil, Q};

/// Condition on one side of a rectangular domain.
#[derive(Debug, Clone)]
pub enum EdgeCondition {
    Periodic,
    Wall {
        scheme: HalfwayScheme,
        datum: BoundaryDatum,
    },
}

impl EdgeCondition {
    pub fn wall(scheme: HalfwayScheme, datum: BoundaryDatum) -> Self {
        EdgeCondition::Wall { scheme, datum }
    }
}

#[derive(Debug, Clone)]
pub struct BoxEdges {
    pub bottom: EdgeCondition,
    pub top: EdgeCondition,
    pub left: EdgeCondition,
    pub right: EdgeCondition,
}

impl BoxEdges {
    pub fn periodic() -> Self {
        Self::uniform(EdgeCondition::Periodic)
    }

    pub fn uniform(edge: EdgeCondition) -> Self {
        Self {
            bottom: edge.clone(),
            top: edge.clone(),
            left: edge.clone(),
            right: edge,
        }
    }

    fn get(&self, wall: Wall) -> &EdgeCondition {
        match wall {
            Wall::Bottom => &self.bottom,
            Wall::Top => &self.top,
            Wall::Left => &self.left,
            Wall::Right => &self.right,
        }
    }
}

/// Interpolated rule on the cut links of a disc.
#[derive(Debug, Clone)]
pub struct DiscBoundary {
    pub geometry: DiscGeometry,
    pub reflection: Reflection,
    pub interpolation: Interpolation,
    pub datum: BoundaryDatum,
}

#[derive(Debug, Clone)]
pub enum Geometry {
    /// Every node of the grid is fluid; edges are periodic or halfway walls.
    Box(BoxEdges),
    /// Only nodes strictly inside the disc are fluid.
    Disc(DiscBoundary),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    Pull(u32),
    Link(u32),
}

#[derive(Debug, Clone, Copy)]
enum LinkKind {
    Halfway {
        scheme: HalfwayScheme,
        wall: Wall,
    },
    Extended {
        interpolation: Interpolation,
        reflection: Reflection,
        eta: f64,
        next: Option<u32>,
        next2: Option<u32>,
    },
}

#[derive(Debug, Clone, Copy)]
struct Link {
    q: usize,
    kind: LinkKind,
    datum: usize,
    /// Arc-length coordinate of the crossing point (physical units).
    arc: f64,
}

/// Population field with its geometry and collision model.
#[derive(Debug, Clone)]
pub struct Simulation {
    model: CollisionModel,
    nx: usize,
    ny: usize,
    dx: f64,
    dt: f64,
    nodes: Vec<[usize; 2]>,
    grid_index: Vec<u32>,
    stream: Vec<[Source; Q]>,
    /// Nodes whose every population is pulled from a fluid neighbour.
    interior: Vec<bool>,
    links: Vec<Link>,
    datums: Vec<BoundaryDatum>,
    xi: XiParams,
    f: Vec<[f64; Q]>,
    post: Vec<[f64; Q]>,
    time: u64,
}

const NOT_FLUID: u32 = u32::MAX;

/// Nodes per parallel work item.
const CHUNK: usize = 512;

impl Simulation {
    /// Builds a simulation initialised at rest (`f = 0`).
    ///
    /// `dx` is the cell size; the time step follows from the model's lattice speed.
    pub fn new(model: CollisionModel, nx: usize, ny: usize, dx: f64, geometry: Geometry) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Configuration(format!("empty grid {nx}x{ny}")));
        }
        if !dx.is_finite() || dx <= 0.0 {
            return Err(Error::param("dx", format!("must be positive, got {dx}")));
        }
        if nx * ny >= NOT_FLUID as usize {
            return Err(Error::Configuration("grid too large".into()));
        }
        let dt = dx / model.lambda();
        let xi = XiParams::from_model(&model);
        let mut sim = Self {
            model,
            nx,
            ny,
            dx,
            dt,
            nodes: Vec::new(),
            grid_index: vec![NOT_FLUID; nx * ny],
            stream: Vec::new(),
            interior: Vec::new(),
            links: Vec::new(),
            datums: Vec::new(),
            xi,
            f: Vec::new(),
            post: Vec::new(),
            time: 0,
        };
        match geometry {
            Geometry::Box(edges) => sim.build_box(&edges)?,
            Geometry::Disc(disc) => sim.build_disc(disc)?,
        }
        sim.interior = sim
            .stream
            .iter()
            .map(|row| row.iter().all(|s| matches!(s, Source::Pull(_))))
            .collect();
        sim.f = vec![[0.0; Q]; sim.nodes.len()];
        sim.post = sim.f.clone();
        Ok(sim)
    }

    fn build_box(&mut self, edges: &BoxEdges) -> Result<()> {
        let (nx, ny) = (self.nx, self.ny);
        for (a, b) in [(Wall::Bottom, Wall::Top), (Wall::Left, Wall::Right)] {
            let pa = matches!(edges.get(a), EdgeCondition::Periodic);
            let pb = matches!(edges.get(b), EdgeCondition::Periodic);
            if pa != pb {
                return Err(Error::Configuration(format!(
                    "{a:?} and {b:?} edges must both be periodic or both walls"
                )));
            }
        }
        let mut datum_of = [usize::MAX; 4];
        for (w, wall) in Wall::ALL.iter().enumerate() {
            if let EdgeCondition::Wall { datum, .. } = edges.get(*wall) {
                datum_of[w] = self.datums.len();
                self.datums.push(datum.clone());
            }
        }
        for j in 0..ny {
            for i in 0..nx {
                self.grid_index[j * nx + i] = self.nodes.len() as u32;
                self.nodes.push([i, j]);
            }
        }
        let dx = self.dx;
        for n in 0..self.nodes.len() {
            let [i, j] = self.nodes[n];
            let mut row = [Source::Pull(0); Q];
            for (q, slot) in row.iter_mut().enumerate() {
                let [vx, vy] = Stencil::velocity(q);
                let mut si = i as i64 - vx as i64;
                let mut sj = j as i64 - vy as i64;
                // horizontal walls take precedence at corners
                let mut crossed = None;
                if sj < 0 || sj >= ny as i64 {
                    let wall = if sj < 0 { Wall::Bottom } else { Wall::Top };
                    match edges.get(wall) {
                        EdgeCondition::Periodic => sj = sj.rem_euclid(ny as i64),
                        EdgeCondition::Wall { .. } => crossed = Some(wall),
                    }
                }
                if crossed.is_none() && (si < 0 || si >= nx as i64) {
                    let wall = if si < 0 { Wall::Left } else { Wall::Right };
                    match edges.get(wall) {
                        EdgeCondition::Periodic => si = si.rem_euclid(nx as i64),
                        EdgeCondition::Wall { .. } => crossed = Some(wall),
                    }
                }
                *slot = match crossed {
                    None => Source::Pull(self.grid_index[sj as usize * nx + si as usize]),
                    Some(wall) => {
                        let EdgeCondition::Wall { scheme, .. } = edges.get(wall) else {
                            unreachable!()
                        };
                        let w = Wall::ALL.iter().position(|x| *x == wall).expect("known wall");
                        let pos = [(i as f64 + 0.5) * dx, (j as f64 + 0.5) * dx];
                        let arc = crate::boundary::crossing_arc_position(wall, q, pos, dx);
                        self.links.push(Link {
                            q,
                            kind: LinkKind::Halfway { scheme: *scheme, wall },
                            datum: datum_of[w],
                            arc,
                        });
                        Source::Link(self.links.len() as u32 - 1)
                    }
                };
            }
            self.stream.push(row);
        }
        Ok(())
    }

    fn build_disc(&mut self, disc: DiscBoundary) -> Result<()> {
        let g = &disc.geometry;
        if g.nx != self.nx || g.ny != self.ny {
            return Err(Error::Configuration(format!(
                "disc geometry is {}x{} but the grid is {}x{}",
                g.nx, g.ny, self.nx, self.ny
            )));
        }
        let nx = self.nx;
        for j in 0..self.ny {
            for i in 0..nx {
                if g.contains(i as i64, j as i64) {
                    self.grid_index[j * nx + i] = self.nodes.len() as u32;
                    self.nodes.push([i, j]);
                }
            }
        }
        self.datums.push(disc.datum.clone());
        let lookup = |i: i64, j: i64| -> Option<u32> {
            if i < 0 || j < 0 || i >= nx as i64 || j >= self.ny as i64 {
                return None;
            }
            let id = self.grid_index[j as usize * nx + i as usize];
            (id != NOT_FLUID).then_some(id)
        };
        let mut stream = Vec::with_capacity(self.nodes.len());
        for &[i, j] in &self.nodes {
            let mut row = [Source::Pull(0); Q];
            for (q, slot) in row.iter_mut().enumerate() {
                let [vx, vy] = Stencil::velocity(q);
                let src = lookup(i as i64 - vx as i64, j as i64 - vy as i64);
                *slot = match src {
                    Some(s) => Source::Pull(s),
                    None => Source::Link(u32::MAX),
                };
            }
            stream.push(row);
        }
        for l in &g.links {
            let n = self.grid_index[l.node[1] * nx + l.node[0]];
            let [vx, vy] = Stencil::velocity(l.q).map(|v| v as i64);
            let (i, j) = (l.node[0] as i64, l.node[1] as i64);
            let next = lookup(i + vx, j + vy);
            let next2 = lookup(i + 2 * vx, j + 2 * vy);
            let mut interpolation = disc.interpolation;
            if interpolation == Interpolation::Quadratic && (next.is_none() || (l.eta <= 0.5 && next2.is_none())) {
                interpolation = Interpolation::Linear;
            }
            if l.eta <= 0.5 && next.is_none() {
                return Err(Error::Configuration(format!(
                    "link {} at node ({i}, {j}) needs an interior neighbour that is not fluid",
                    l.q
                )));
            }
            self.links.push(Link {
                q: l.q,
                kind: LinkKind::Extended {
                    interpolation,
                    reflection: disc.reflection,
                    eta: l.eta,
                    next,
                    next2,
                },
                datum: 0,
                arc: g.arc_position(l.crossing) * self.dx,
            });
            stream[n as usize][l.q] = Source::Link(self.links.len() as u32 - 1);
        }
        if stream.iter().flatten().any(|s| *s == Source::Link(u32::MAX)) {
            return Err(Error::Contract("disc link table is incomplete".into()));
        }
        self.stream = stream;
        Ok(())
    }

    pub fn model(&self) -> &CollisionModel {
        &self.model
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn time_step(&self) -> u64 {
        self.time
    }
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
    /// Grid coordinates of each fluid node, in storage order.
    pub fn nodes(&self) -> &[[usize; 2]] {
        &self.nodes
    }
    /// Storage index of grid node `(i, j)` if it is fluid.
    pub fn node_index(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.nx || j >= self.ny {
            return None;
        }
        let id = self.grid_index[j * self.nx + i];
        (id != NOT_FLUID).then_some(id as usize)
    }
    pub fn populations(&self) -> &[[f64; Q]] {
        &self.f
    }
    pub fn populations_mut(&mut self) -> &mut [[f64; Q]] {
        &mut self.f
    }
    pub fn boundary_link_count(&self) -> usize {
        self.links.len()
    }

    /// True when every boundary datum is identically zero, so that a step is linear.
    pub fn is_homogeneous(&self) -> bool {
        self.datums.iter().all(BoundaryDatum::is_homogeneous)
    }

    pub fn set_time_step(&mut self, t: u64) {
        self.time = t;
    }

    /// Fills every node with the equilibrium of `(rho, jx, jy)`.
    pub fn fill_equilibrium(&mut self, rho: f64, jx: f64, jy: f64) {
        let eq = self
            .model
            .basis()
            .from_moments(&self.model.equilibrium_from(rho, jx, jy));
        self.f.iter_mut().for_each(|f| *f = eq);
    }

    /// Sets every node from a function of its grid coordinates returning `(rho, jx, jy)`.
    pub fn fill_equilibrium_with(&mut self, field: impl Fn(usize, usize) -> (f64, f64, f64)) {
        for (n, &[i, j]) in self.nodes.iter().enumerate() {
            let (r, jx, jy) = field(i, j);
            self.f[n] = self.model.basis().from_moments(&self.model.equilibrium_from(r, jx, jy));
        }
    }

    /// One collide, stream and boundary-fill update.
    pub fn step(&mut self) -> Result<()> {
        let model = &self.model;
        self.post
            .par_chunks_mut(CHUNK)
            .zip(self.f.par_chunks(CHUNK))
            .for_each(|(p, f)| {
                for (p, f) in p.iter_mut().zip(f) {
                    *p = model.collide(f);
                }
            });

        let t_phys = self.time as f64 * self.dt;
        let ctx = StreamContext {
            post: &self.post,
            links: &self.links,
            datums: &self.datums,
            xi: &self.xi,
            lambda: model.lambda(),
            t: t_phys,
        };
        let finite = self
            .f
            .par_chunks_mut(CHUNK)
            .zip(self.stream.par_chunks(CHUNK))
            .zip(self.interior.par_chunks(CHUNK))
            .enumerate()
            .map(|(c, ((f, rows), interior))| {
                let mut acc = 0.0;
                for (k, ((f, row), &inner)) in f.iter_mut().zip(rows).zip(interior).enumerate() {
                    acc += ctx.stream_node(c * CHUNK + k, f, row, inner);
                }
                // NaN and infinities propagate into the sum
                acc.is_finite()
            })
            .reduce(|| true, |a, b| a && b);
        self.time += 1;
        if !finite {
            return Err(Error::Divergence { step: self.time });
        }
        Ok(())
    }

    /// Runs `n` steps.
    pub fn run(&mut self, n: u64) -> Result<()> {
        for _ in 0..n {
            self.step()?;
        }
        Ok(())
    }

    /// Moments of every fluid node, in storage order.
    pub fn moments(&self) -> Vec<MomentVector> {
        let b = self.model.basis();
        self.f.par_iter().map(|f| b.to_moments(f)).collect()
    }

    /// One moment as a row-major `nx * ny` grid; non-fluid nodes hold NaN.
    pub fn moment_field(&self, k: usize) -> Vec<f64> {
        let mut out = vec![f64::NAN; self.nx * self.ny];
        for (m, &[i, j]) in self.moments().iter().zip(&self.nodes) {
            out[j * self.nx + i] = m.0[k];
        }
        out
    }

    /// All nine moment grids, indexed as [`crate::lattice::moment`].
    pub fn moment_fields(&self) -> MomentFields {
        let moments = self.moments();
        let mut fields = vec![vec![f64::NAN; self.nx * self.ny]; Q];
        for (m, &[i, j]) in moments.iter().zip(&self.nodes) {
            for (field, v) in fields.iter_mut().zip(m.0) {
                field[j * self.nx + i] = v;
            }
        }
        MomentFields {
            nx: self.nx,
            ny: self.ny,
            fields,
        }
    }

    /// Population vector flattened node-major.
    pub fn state_vector(&self) -> Vec<f64> {
        self.f.iter().flatten().copied().collect()
    }

    pub fn set_state_vector(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.f.len() * Q {
            return Err(Error::InvalidArgument(format!(
                "state vector has length {}, expected {}",
                v.len(),
                self.f.len() * Q
            )));
        }
        for (f, chunk) in self.f.iter_mut().zip(v.chunks_exact(Q)) {
            f.copy_from_slice(chunk);
        }
        Ok(())
    }
}

/// Per-node moment grids, row-major with `j * nx + i` indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentFields {
    pub nx: usize,
    pub ny: usize,
    pub fields: Vec<Vec<f64>>,
}

impl MomentFields {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.fields[k][j * self.nx + i]
    }
    pub fn rho(&self) -> &[f64] {
        &self.fields[moment::RHO]
    }
    pub fn jx(&self) -> &[f64] {
        &self.fields[moment::JX]
    }
    pub fn jy(&self) -> &[f64] {
        &self.fields[moment::JY]
    }
    pub fn phi_y(&self) -> &[f64] {
        &self.fields[moment::PHI_Y]
    }
}

struct StreamContext<'a> {
    post: &'a [[f64; Q]],
    links: &'a [Link],
    datums: &'a [BoundaryDatum],
    xi: &'a XiParams,
    lambda: f64,
    t: f64,
}

impl StreamContext<'_> {
    /// Gathers the new populations of node `n`; returns their sum.
    #[inline]
    fn stream_node(&self, n: usize, f: &mut [f64; Q], row: &[Source; Q], interior: bool) -> f64 {
        let mut acc = 0.0;
        if interior {
            for q in 0..Q {
                if let Source::Pull(s) = row[q] {
                    f[q] = self.post[s as usize][q];
                    acc += f[q];
                }
            }
        } else {
            // the pressure + tangential rule reads the node's momentum before streaming
            let node_j = self.momentum(f);
            for q in 0..Q {
                f[q] = match row[q] {
                    Source::Pull(s) => self.post[s as usize][q],
                    Source::Link(l) => self.link_value(n, &self.links[l as usize], node_j),
                };
                acc += f[q];
            }
        }
        acc
    }

    #[inline]
    fn momentum(&self, f: &[f64; Q]) -> [f64; 2] {
        let jx = f[1] - f[3] + f[5] - f[6] - f[7] + f[8];
        let jy = f[2] - f[4] + f[5] + f[6] - f[7] - f[8];
        [self.lambda * jx, self.lambda * jy]
    }

    #[inline]
    fn link_value(&self, n: usize, link: &Link, node_j: [f64; 2]) -> f64 {
        let q = link.q;
        let o = Stencil::opposite(q);
        let data = self.datums[link.datum].sample(link.arc, self.t);
        match link.kind {
            LinkKind::Halfway { scheme, wall } => {
                halfway_link_value(scheme, self.xi, wall, q, self.post[n][o], data, node_j)
            }
            LinkKind::Extended {
                interpolation,
                reflection,
                eta,
                next,
                next2,
            } => {
                let xi = match reflection {
                    Reflection::AntiBounce => xi_abb_coefficient(self.xi, q) * data.rho0,
                    Reflection::Bounce => xi_bb_raw(self.xi, q, data.jx0, data.jy0),
                };
                let at = |id: Option<u32>, d: usize| id.map_or(0.0, |s| self.post[s as usize][d]);
                let samples = LinkSamples {
                    out_here: self.post[n][o],
                    out_next: at(next, o),
                    out_next2: at(next2, o),
                    in_here: self.post[n][q],
                    in_next: at(next, q),
                };
                match interpolation {
                    Interpolation::Linear => extended_linear(eta, reflection.sign(), &samples, xi),
                    Interpolation::Quadratic => extended_quadratic(eta, reflection.sign(), &samples, xi),
                }
            }
        }
    }
}
