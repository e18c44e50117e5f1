//! The three-stage F-matrix solver.
//!
//! Input: a fusion ring with R-symbol data from [`catalog`]. Output: one
//! exact F-symbol per admissible non-vacuum sextuple, as elements of a
//! square-root tower over `Q(zeta_m)`. The pipeline:
//!
//! 1. **Hexagons first.** Both hexagon families plus orthogonality form a
//!    system that splits into small connected components; each component
//!    gets a Groebner basis and the cheap eliminations are harvested. This
//!    alone determines well over half the unknowns for the rings shipped
//!    in the catalog.
//! 2. **Pentagons as a reduction mill.** The pentagon equations are
//!    generated already reduced against the stage-1 tables, then rounds of
//!    two-term elimination and back-substitution shrink the system until
//!    nothing moves. What stalls the mill are multivariate couplings with
//!    no univariate pivot; per-component *lex* Groebner bases crack those
//!    — lex is an elimination order, so each small component comes back
//!    triangular and the scanner unwinds it.
//! 3. **Radicals.** What survives is a list of known squares
//!    `x_j^2 = alpha`, plus possibly a few relations coupling them (sign
//!    constraints among square roots, typically). Grounding interleaves
//!    the two: a relation with one live unknown determines that unknown
//!    outright — linearly, as a square, or by completing the square —
//!    and otherwise the smallest square-known unknown takes the positive
//!    branch of its root, adjoining a radical when the tower lacks one.
//!    Back-substitution then grounds every remaining unknown.
//!
//! # Key operations
//!
//! * [`solve`] — the full pipeline; [`Solver`] exposes the stages
//!   individually for inspection.
//! * [`FSymbolTable::verify`] — re-checks pentagon, both hexagons,
//!   orthogonality, rigidity and the pivotal identity, exactly, against a
//!   finished table.
//! * [`FSymbolTable::apply_gauge`] — vertex-basis rescaling; used to test
//!   gauge invariance of braiding data.
//!
//! # Design notes
//!
//! An assignment `x_j := v` is only ever stored *triangular*: `v` mentions
//! variables strictly below `j`. Together with keeping all stored values
//! fully reduced against each other, this makes one substitution pass
//! idempotent and keeps every stage deterministic.
//!
//! Zero is a legal F-symbol value outside the 1x1 blocks — `su2-4`'s
//! middle `F[Y,Y,Y;Y]` entry vanishes, for instance — so only variables of
//! 1x1 blocks (pinned to `x^2 = 1` by orthogonality) are treated as
//! nonzero: they alone cancel from monomial common factors, and only they
//! turn a forced zero into an error.
//!
//! Inconsistency is not an afterthought: any nonzero constant surfacing in
//! a reduced basis, any 1x1-block variable forced to zero, and any pair of
//! contradicting eliminations aborts the solve with the provenance of the
//! offending equations. Broken input data fails loudly, not numerically.
//!
//! Worker counts never change results. Equation generation is striped by
//! ordinal, basis reduction is chunked in order, and every merge happens
//! in input order, so a table solved with eight workers is identical to
//! one solved with one.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::buchberger::{buchberger, is_inconsistent, GroebnerOutcome};
use crate::catalog::{index_sextuples, FusionRingData, Label, Sextuple, SextupleIndex};
use crate::cyclo::CycloNumber;
use crate::eqgen::{self, EquationSystem, HexSign, Provenance, ReduceTables};
use crate::matrix::TowerMatrix;
use crate::sparsepoly::{SparsePoly, TermOrder};
use crate::tower::{
    radicals_from_ser, radicals_to_ser, TowerContext, TowerNumber, TowerTermsSer,
};

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("equation generation failed: {0}")]
    Eqgen(#[from] eqgen::EqgenError),
    #[error("inconsistent system: {0}")]
    Inconsistent(String),
    #[error("solver stalled: {0}")]
    Stalled(String),
    #[error("invalid gauge: {0}")]
    BadGauge(String),
    #[error("malformed F-symbol data: {0}")]
    Malformed(String),
}

/// Knobs for [`solve`]. `Default` matches the command-line defaults.
#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Threads for generation and reduction. Any value gives identical
    /// results; more threads only trade wall time.
    pub workers: usize,
    /// Stage-1 components with more variables than this skip their
    /// Groebner basis and ride along into stage 2 unprocessed.
    pub max_component_size: usize,
    /// Progress chatter on stderr.
    pub verbose: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            workers: 1,
            max_component_size: 45,
            verbose: false,
        }
    }
}

/// Where a working-basis polynomial came from, for error reports.
#[derive(Clone, Debug)]
enum Origin {
    Generated(Provenance),
    Component { stage: u8, root: u32 },
    Consistency { var: u32 },
}

impl Origin {
    fn describe(&self, ring: &FusionRingData, index: &SextupleIndex) -> String {
        match self {
            Origin::Generated(p) => p.describe(ring),
            Origin::Component { stage, root } => format!(
                "stage-{} basis of the component containing {}",
                stage,
                var_label(ring, index, *root)
            ),
            Origin::Consistency { var } => format!(
                "cross-check of two derivations of {}",
                var_label(ring, index, *var)
            ),
        }
    }
}

/// Variables provably nonzero before any solving: entries of 1x1 F-blocks,
/// whose only orthogonality relation reads `x^2 = 1`. Every other F-symbol
/// may legally vanish, so these are the only variables the solver divides
/// out of monomial common factors.
fn unit_block_vars(ring: &FusionRingData, index: &SextupleIndex) -> BTreeSet<u32> {
    let mut out = BTreeSet::new();
    for (i, s) in index.iter() {
        let [a, b, c, d, _, _] = *s;
        let rows = ring
            .fuse(a, b)
            .into_iter()
            .filter(|&e| ring.n(e, c, d))
            .count();
        if rows == 1 {
            out.insert((i + 1) as u32);
        }
    }
    out
}

/// Renders variable `v` as the F-symbol it stands for.
fn var_label(ring: &FusionRingData, index: &SextupleIndex, v: u32) -> String {
    let s = index.idx_to_sextuple(v as usize - 1);
    let n = |l: Label| ring.label_name(l);
    format!(
        "F[{},{},{};{}|{},{}]",
        n(s[0]),
        n(s[1]),
        n(s[2]),
        n(s[3]),
        n(s[4]),
        n(s[5])
    )
}

/// Counters reported by the solver, one field per claim in the docs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Unknowns (admissible non-vacuum sextuples).
    pub variables: usize,
    /// Deduplicated stage-1 equations (hexagons + orthogonality).
    pub stage1_equations: usize,
    /// Stage-1 component sizes in variables, ascending.
    pub stage1_components: Vec<usize>,
    /// Components that exceeded `max_component_size`.
    pub stage1_deferred: usize,
    /// Variables assigned by the end of stage 1.
    pub stage1_assigned: usize,
    /// Known squares recorded by the end of stage 1.
    pub stage1_squares: usize,
    /// Deduplicated nonzero pentagon equations (before table reduction).
    pub pentagons_generated: usize,
    /// Elimination rounds in stage 2.
    pub stage2_rounds: usize,
    /// Basis polynomials still alive entering stage 3.
    pub stage2_residual: usize,
    /// Radicals adjoined in stage 3.
    pub stage3_radicals: usize,
    /// True when stage 3 saw only `x^2 = alpha` inputs and no leftover
    /// relations.
    pub stage3_quadratic_only: bool,
}

/// A fully solved ring: the table plus the counters accumulated on the way.
#[derive(Clone, Debug)]
pub struct SolvedRing {
    pub table: FSymbolTable,
    pub stats: SolveStats,
}

/// Runs all three stages.
pub fn solve(ring: &FusionRingData, opts: &SolveOptions) -> Result<SolvedRing, SolveError> {
    let mut solver = Solver::new(ring, opts.clone());
    solver.step1()?;
    solver.step2()?;
    solver.step3()
}

// ---------------------------------------------------------------------------
// The solver
// ---------------------------------------------------------------------------

/// One elimination found by a scan of the working basis.
enum EasyFind {
    /// `x_j := value`, value strictly below `j`.
    Assign(u32, SparsePoly, usize),
    /// `x_j^2 = alpha`.
    Square(u32, CycloNumber, usize),
}

/// Staged solving state. [`solve`] drives it start to finish; tests and
/// examples can step it and inspect [`Solver::stats`] between stages.
pub struct Solver<'r> {
    ring: &'r FusionRingData,
    index: SextupleIndex,
    opts: SolveOptions,
    nvars: usize,
    /// Triangular, mutually reduced variable assignments.
    assignments: BTreeMap<u32, SparsePoly>,
    /// `x_j^2 = alpha` facts; values are nonzero constants.
    known_squares: BTreeMap<u32, CycloNumber>,
    /// Variables pinned nonzero from the start: entries of 1x1 F-blocks,
    /// which orthogonality forces to square to one. Monomial cancellation
    /// divides only by these; any other F-symbol may legally vanish.
    known_nonzero: BTreeSet<u32>,
    /// Unconsumed relations, each with its origin.
    basis: Vec<(SparsePoly, Origin)>,
    /// Highest power of each variable seen in the current basis.
    var_degs: BTreeMap<u32, u32>,
    stats: SolveStats,
}

impl<'r> Solver<'r> {
    pub fn new(ring: &'r FusionRingData, opts: SolveOptions) -> Self {
        assert!(opts.workers >= 1, "worker count must be positive");
        let index = index_sextuples(ring);
        let nvars = index.len();
        let known_nonzero = unit_block_vars(ring, &index);
        let mut stats = SolveStats::default();
        stats.variables = nvars;
        Solver {
            ring,
            index,
            opts,
            nvars,
            assignments: BTreeMap::new(),
            known_squares: BTreeMap::new(),
            known_nonzero,
            basis: Vec::new(),
            var_degs: BTreeMap::new(),
            stats,
        }
    }

    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }

    /// Variables currently assigned an explicit value.
    pub fn assigned(&self) -> usize {
        self.assignments.len()
    }

    /// Relations still unconsumed.
    pub fn residual(&self) -> usize {
        self.basis.len()
    }

    /// Renders the unconsumed relations, one per line, for diagnostics.
    pub fn render_residual(&self) -> String {
        let mut out = String::new();
        for (p, o) in &self.basis {
            out.push_str(&format!(
                "{}    <- {}\n",
                p.render(&|v| var_label(self.ring, &self.index, v)),
                o.describe(self.ring, &self.index)
            ));
        }
        out
    }

    fn chat(&self, msg: impl FnOnce() -> String) {
        if self.opts.verbose {
            eprintln!("solve[{}]: {}", self.ring.name(), msg());
        }
    }

    /// Stage 1: hexagons and orthogonality, componentwise Groebner bases,
    /// then one harvest of the cheap eliminations.
    pub fn step1(&mut self) -> Result<(), SolveError> {
        let sys = eqgen::gen_step1_system(self.ring, &self.index, self.opts.workers)?;
        self.stats.stage1_equations = sys.len();
        self.chat(|| format!("stage 1: {} equations over {} unknowns", sys.len(), self.nvars));

        // Partition equations by shared variables: two unknowns belong to
        // one component whenever some equation mentions both.
        let mut ds = DisjointSet::new(self.nvars as u32);
        for p in &sys.polys {
            let mut vars = p.support().into_iter();
            if let Some(first) = vars.next() {
                for v in vars {
                    ds.union(first, v);
                }
            } else if !p.is_zero() {
                return Err(SolveError::Inconsistent(format!(
                    "constant equation from {}",
                    sys.provenance[0].describe(self.ring)
                )));
            }
        }
        let mut groups: BTreeMap<u32, (BTreeSet<u32>, Vec<usize>)> = BTreeMap::new();
        for (i, p) in sys.polys.iter().enumerate() {
            let support = p.support();
            let root = ds.find(*support.iter().next().expect("nonconstant equation"));
            let entry = groups.entry(root).or_default();
            entry.0.extend(support);
            entry.1.push(i);
        }
        let mut components: Vec<(BTreeSet<u32>, Vec<usize>)> = groups.into_values().collect();
        components.sort_by_key(|(vars, _)| (vars.len(), *vars.iter().next().unwrap()));
        self.stats.stage1_components = components.iter().map(|(v, _)| v.len()).collect();
        self.chat(|| {
            format!(
                "stage 1: {} components, sizes {:?}",
                components.len(),
                self.stats.stage1_components
            )
        });

        for (vars, eq_idxs) in components {
            let polys: Vec<SparsePoly> =
                eq_idxs.iter().map(|&i| sys.polys[i].clone()).collect();
            match buchberger(&polys, self.opts.max_component_size, TermOrder::Degrevlex) {
                GroebnerOutcome::Skipped { var_count, .. } => {
                    self.stats.stage1_deferred += 1;
                    self.chat(|| {
                        format!("stage 1: deferred a {var_count}-variable component to stage 2")
                    });
                    for &i in &eq_idxs {
                        self.basis.push((
                            sys.polys[i].clone(),
                            Origin::Generated(sys.provenance[i].clone()),
                        ));
                    }
                }
                GroebnerOutcome::Basis(gb) => {
                    if is_inconsistent(&gb) {
                        let witnesses: Vec<String> = eq_idxs
                            .iter()
                            .take(3)
                            .map(|&i| sys.provenance[i].describe(self.ring))
                            .collect();
                        return Err(SolveError::Inconsistent(format!(
                            "the component containing {} reduces to 1 = 0; drawn from {}",
                            var_label(self.ring, &self.index, *vars.iter().next().unwrap()),
                            witnesses.join("; ")
                        )));
                    }
                    let root = *vars.iter().next().unwrap();
                    for p in gb {
                        self.basis.push((p, Origin::Component { stage: 1, root }));
                    }
                }
            }
        }

        // Normalize the union of the component bases once (monomial
        // factors divided out, duplicates dropped), then run the
        // triangular solver to a fixed point.
        self.reduce_basis()?;
        loop {
            let finds = self.scan_easy()?;
            if finds.is_empty() {
                break;
            }
            let changed = self.integrate(finds)?;
            self.reduce_basis()?;
            if !changed {
                break;
            }
        }
        self.stats.stage1_assigned = self.assignments.len();
        self.stats.stage1_squares = self.known_squares.len();
        self.chat(|| {
            format!(
                "stage 1: {} assigned, {} squares, {} relations kept",
                self.assignments.len(),
                self.known_squares.len(),
                self.basis.len()
            )
        });
        Ok(())
    }

    /// Stage 2: pentagons, reduced against the stage-1 tables the moment
    /// they are created, then elimination rounds until a fixed point.
    pub fn step2(&mut self) -> Result<(), SolveError> {
        // The raw census is the denominator for the residual ratio the
        // docs quote; generation is cheap next to the later rounds.
        let raw = eqgen::gen_pentagon(self.ring, &self.index, None, self.opts.workers);
        self.stats.pentagons_generated = raw.len();
        let sys = {
            let tables = ReduceTables {
                known_squares: &self.known_squares,
                assignments: &self.assignments,
                nonzero: &self.known_nonzero,
            };
            eqgen::gen_pentagon(self.ring, &self.index, Some(tables), self.opts.workers)
        };
        self.chat(|| {
            format!(
                "stage 2: {} pentagon equations, {} live after table reduction",
                raw.len(),
                sys.len()
            )
        });
        self.absorb(sys);
        self.reduce_basis()?;

        loop {
            self.stats.stage2_rounds += 1;
            let finds = self.scan_easy()?;
            if finds.is_empty() {
                break;
            }
            let changed = self.integrate(finds)?;
            self.reduce_basis()?;
            if !changed {
                break;
            }
        }
        // What stalls the mill are multivariate couplings with no
        // univariate pivot. Per-component lex bases crack those: lex is an
        // elimination order, so each small component comes back
        // triangular and the scanner unwinds it.
        self.groebner_elim_rounds(2, self.opts.max_component_size)?;
        self.stats.stage2_residual = self.basis.len();
        self.chat(|| {
            format!(
                "stage 2: {} rounds; {} assigned, {} squares, {} relations left",
                self.stats.stage2_rounds,
                self.assignments.len(),
                self.known_squares.len(),
                self.basis.len()
            )
        });
        Ok(())
    }

    /// Stage 3: ground every unknown in the tower, adjoining radicals for
    /// squares without one, and finish the table.
    pub fn step3(mut self) -> Result<SolvedRing, SolveError> {
        self.stats.stage3_quadratic_only = self.basis.is_empty();

        // Relations that rode along past stage 2 get one more treatment,
        // this time without a component size limit.
        self.groebner_elim_rounds(3, usize::MAX)?;

        // Relations that survive cyclo-land elimination couple unknowns
        // whose values need radicals — typically products of square roots
        // whose relative signs they pin down. They resolve during
        // grounding below.
        let mut residual: Vec<(SparsePoly, Origin)> = std::mem::take(&mut self.basis);
        let mut residual_vars: BTreeSet<u32> = BTreeSet::new();
        for (p, _) in &residual {
            residual_vars.extend(p.support());
        }

        // Every unknown must now be assigned, square-known, or pinned by a
        // residual relation.
        let unresolved: Vec<u32> = (1..=self.nvars as u32)
            .filter(|v| {
                !self.assignments.contains_key(v)
                    && !self.known_squares.contains_key(v)
                    && !residual_vars.contains(v)
            })
            .collect();
        if !unresolved.is_empty() {
            return Err(SolveError::Stalled(format!(
                "{} unknowns are unconstrained (the system is underdetermined), first {}",
                unresolved.len(),
                var_label(self.ring, &self.index, unresolved[0])
            )));
        }

        // Ground the remaining unknowns, smallest first, adjoining
        // radicals as needed; values are kept lifted into the newest
        // tower. Residual relations take precedence: one with a single
        // ungrounded unknown determines that unknown outright, and one
        // with none left must evaluate to zero.
        let order = self.ring.cyclo_order();
        let mut ctx = TowerContext::base(order);
        let mut grounded: BTreeMap<u32, TowerNumber> = BTreeMap::new();
        let mut pending: BTreeSet<u32> = (1..=self.nvars as u32)
            .filter(|v| {
                !self.assignments.contains_key(v)
                    && (self.known_squares.contains_key(v) || residual_vars.contains(v))
            })
            .collect();
        'grounding: while !(pending.is_empty() && residual.is_empty()) {
            for i in 0..residual.len() {
                let live: Vec<u32> = residual[i]
                    .0
                    .support()
                    .into_iter()
                    .filter(|v| pending.contains(v))
                    .collect();
                if live.len() > 1 {
                    continue;
                }
                let (p, origin) = residual.remove(i);
                if live.is_empty() {
                    let v = eval_poly(&p, &grounded, &ctx)?;
                    if !v.is_zero() {
                        return Err(SolveError::Inconsistent(format!(
                            "a grounded relation fails to vanish: {} (from {})",
                            p.render(&|v| var_label(self.ring, &self.index, v)),
                            origin.describe(self.ring, &self.index)
                        )));
                    }
                    continue 'grounding;
                }
                let j = live[0];
                let (a2, a1, a0) = split_by_var(&p, j, &grounded, &ctx)?;
                let value = if a2.is_zero() {
                    if a1.is_zero() {
                        // The unknown dropped out numerically; the relation
                        // is either vacuous or contradictory.
                        if a0.is_zero() {
                            continue 'grounding;
                        }
                        return Err(SolveError::Inconsistent(format!(
                            "a grounded relation fails to vanish: {} (from {})",
                            p.render(&|v| var_label(self.ring, &self.index, v)),
                            origin.describe(self.ring, &self.index)
                        )));
                    }
                    let inv = a1.inv().expect("nonzero by the is_zero check");
                    a0.mul(&inv).neg()
                } else if a1.is_zero() {
                    // A x^2 + C = 0: a square with a tower-valued right side.
                    let alpha = a0.mul(&a2.inv().expect("nonzero")).neg();
                    ground_root(
                        &mut ctx,
                        &mut grounded,
                        &mut self.stats.stage3_radicals,
                        &alpha,
                    )?
                } else {
                    // A x^2 + B x + C = 0: complete the square, keeping the
                    // principal branch of the discriminant.
                    let four = TowerNumber::from_rational(&ctx, BigRational::from_integer(4.into()));
                    let disc = a1.mul(&a1).sub(&four.mul(&a2).mul(&a0));
                    let s = ground_root(
                        &mut ctx,
                        &mut grounded,
                        &mut self.stats.stage3_radicals,
                        &disc,
                    )?;
                    let a1 = a1.lift(&ctx);
                    let a2 = a2.lift(&ctx);
                    let two_a2 = a2.add(&a2);
                    s.sub(&a1).mul(&two_a2.inv().expect("nonzero by the is_zero check"))
                };
                let value = value.lift(&ctx);
                if value.is_zero() && self.known_nonzero.contains(&j) {
                    return Err(SolveError::Inconsistent(format!(
                        "{} sits in a 1x1 F-block but is forced to zero by {}",
                        var_label(self.ring, &self.index, j),
                        origin.describe(self.ring, &self.index)
                    )));
                }
                if let Some(known) = self.known_squares.get(&j) {
                    let known = TowerNumber::from_cyclo(&ctx, known.clone());
                    if value.mul(&value) != known {
                        return Err(SolveError::Inconsistent(format!(
                            "the value of {} from {} clashes with its known square",
                            var_label(self.ring, &self.index, j),
                            origin.describe(self.ring, &self.index)
                        )));
                    }
                }
                grounded.insert(j, value);
                pending.remove(&j);
                continue 'grounding;
            }
            // No relation is actionable: ground the smallest pending
            // square-known unknown directly.
            let next_sq = pending
                .iter()
                .copied()
                .find(|v| self.known_squares.contains_key(v));
            match next_sq {
                Some(j) => {
                    let alpha = TowerNumber::from_cyclo(&ctx, self.known_squares[&j].clone());
                    let root = ground_root(
                        &mut ctx,
                        &mut grounded,
                        &mut self.stats.stage3_radicals,
                        &alpha,
                    )?;
                    grounded.insert(j, root);
                    pending.remove(&j);
                }
                None => break,
            }
        }
        if !(pending.is_empty() && residual.is_empty()) {
            let shown: Vec<String> = residual
                .iter()
                .take(3)
                .map(|(p, o)| {
                    format!(
                        "{} (from {})",
                        p.render(&|v| var_label(self.ring, &self.index, v)),
                        o.describe(self.ring, &self.index)
                    )
                })
                .collect();
            return Err(SolveError::Stalled(format!(
                "grounding stalled with {} relations and {} unknowns left: {}",
                residual.len(),
                pending.len(),
                shown.join("; ")
            )));
        }
        self.chat(|| {
            format!(
                "stage 3: {} radicals adjoined for {} grounded unknowns",
                self.stats.stage3_radicals,
                grounded.len()
            )
        });

        // Back-substitution, ascending: triangularity guarantees every
        // variable below is already grounded.
        let mut values: BTreeMap<u32, TowerNumber> = BTreeMap::new();
        for j in 1..=self.nvars as u32 {
            let value = if let Some(v) = grounded.get(&j) {
                v.lift(&ctx)
            } else {
                let poly = self
                    .assignments
                    .get(&j)
                    .expect("assigned or grounded");
                eval_poly(poly, &values, &ctx)?
            };
            if value.is_zero() && self.known_nonzero.contains(&j) {
                return Err(SolveError::Inconsistent(format!(
                    "{} sits in a 1x1 F-block but evaluates to zero",
                    var_label(self.ring, &self.index, j)
                )));
            }
            values.insert(j, value);
        }
        let values: Vec<TowerNumber> = values.into_values().collect();

        let table = FSymbolTable {
            ring: self.ring.clone(),
            index: self.index,
            ctx,
            values,
        };
        Ok(SolvedRing {
            table,
            stats: self.stats,
        })
    }

    /// Adds generated equations to the basis, deduplicating.
    fn absorb(&mut self, sys: EquationSystem) {
        let mut seen: HashSet<SparsePoly> =
            self.basis.iter().map(|(p, _)| p.clone()).collect();
        for (p, prov) in sys.polys.into_iter().zip(sys.provenance) {
            if seen.insert(p.clone()) {
                self.basis.push((p, Origin::Generated(prov)));
            }
        }
    }

    /// Scans the basis for one- and two-term eliminations.
    fn scan_easy(&self) -> Result<Vec<EasyFind>, SolveError> {
        let mut finds = Vec::new();
        for (i, (p, origin)) in self.basis.iter().enumerate() {
            let terms = p.terms();
            if let Some(c) = p.as_constant() {
                if !c.is_zero() {
                    return Err(SolveError::Inconsistent(format!(
                        "nonzero constant from {}",
                        origin.describe(self.ring, &self.index)
                    )));
                }
                continue;
            }
            if terms.len() == 1 {
                // c * x_j^e = 0 pins x_j to zero — a legal value for an
                // F-symbol outside the 1x1 blocks. A single term in several
                // variables only says *some* factor vanishes; it stays in
                // the basis until reduction narrows it down.
                let support = p.support();
                if support.len() == 1 {
                    let j = *support.iter().next().expect("nonempty support");
                    finds.push(EasyFind::Assign(j, SparsePoly::zero(p.nvars()), i));
                }
                continue;
            }
            if terms.len() != 2 {
                continue;
            }
            // An elimination needs one term of the shape c * x_j^e where
            // x_j is the largest variable of the whole polynomial and the
            // partner term is free of x_j.  The linear case hands x_j a
            // value in strictly smaller variables; the quadratic case
            // against a constant records a known square.  Either term may
            // play the pivot: under a graded order a linear pivot often
            // sits behind a higher-degree partner, as in x3*x4 - c*x5.
            let top = p.max_var().expect("non-constant polynomial has a variable");
            for which in 0..2 {
                let (pivot_m, pivot_c) = &terms[which];
                let (other_m, other_c) = &terms[1 - which];
                let pairs = pivot_m.pairs();
                if pairs.len() != 1 {
                    continue;
                }
                let (j, e) = pairs[0];
                if j != top || other_m.power_of(j) != 0 {
                    continue;
                }
                let neg_ratio = other_c
                    .mul(&pivot_c.inv().expect("coefficient of a kept term is nonzero"))
                    .neg();
                match e {
                    1 => {
                        let value = SparsePoly::monomial(p.nvars(), other_m.clone(), neg_ratio);
                        finds.push(EasyFind::Assign(j, value, i));
                    }
                    2 if other_m.is_one() => {
                        finds.push(EasyFind::Square(j, neg_ratio, i));
                    }
                    _ => {}
                }
                break;
            }
        }
        Ok(finds)
    }

    /// Folds harvested eliminations into the tables. Returns whether any
    /// new fact was recorded.
    fn integrate(&mut self, finds: Vec<EasyFind>) -> Result<bool, SolveError> {
        let mut changed = false;
        for find in finds {
            match find {
                EasyFind::Assign(j, value, src) => {
                    let value = value.reduce_value(&self.known_squares, &self.assignments);
                    if value.is_zero() && self.known_nonzero.contains(&j) {
                        return Err(SolveError::Inconsistent(format!(
                            "{} sits in a 1x1 F-block but is forced to zero by {}",
                            var_label(self.ring, &self.index, j),
                            self.basis[src].1.describe(self.ring, &self.index)
                        )));
                    }
                    if let Some(existing) = self.assignments.get(&j).cloned() {
                        // Two independent derivations of the same symbol.
                        // Their difference is a relation between smaller
                        // variables, not automatically a contradiction; a
                        // genuine one surfaces once the difference reduces
                        // to a nonzero constant.
                        let diff = existing
                            .sub(&value)
                            .update_reduce(&self.known_squares, &self.assignments, &self.known_nonzero);
                        if !diff.is_zero() {
                            self.basis.push((diff, Origin::Consistency { var: j }));
                            changed = true;
                        }
                        continue;
                    }
                    // Keep stored values mutually reduced: fold the new
                    // fact into every value that mentions x_j.
                    let single = BTreeMap::from([(j, value.clone())]);
                    for v in self.assignments.values_mut() {
                        if v.support().contains(&j) {
                            *v = v.reduce_value(&self.known_squares, &single);
                        }
                    }
                    if let Some(alpha) = self.known_squares.get(&j).cloned() {
                        let check = value
                            .mul(&value)
                            .sub(&SparsePoly::constant(value.nvars(), alpha))
                            .update_reduce(&self.known_squares, &self.assignments, &self.known_nonzero);
                        if !check.is_zero() {
                            self.basis.push((check, Origin::Consistency { var: j }));
                        }
                    }
                    self.assignments.insert(j, value);
                    changed = true;
                }
                EasyFind::Square(j, alpha, src) => {
                    if alpha.is_zero() {
                        return Err(SolveError::Inconsistent(format!(
                            "{} squares to zero, from {}",
                            var_label(self.ring, &self.index, j),
                            self.basis[src].1.describe(self.ring, &self.index)
                        )));
                    }
                    if let Some(existing) = self.known_squares.get(&j) {
                        if *existing != alpha {
                            return Err(SolveError::Inconsistent(format!(
                                "conflicting squares for {}, the latter from {}",
                                var_label(self.ring, &self.index, j),
                                self.basis[src].1.describe(self.ring, &self.index)
                            )));
                        }
                        continue;
                    }
                    if let Some(value) = self.assignments.get(&j).cloned() {
                        let check = value
                            .mul(&value)
                            .sub(&SparsePoly::constant(value.nvars(), alpha.clone()))
                            .update_reduce(&self.known_squares, &self.assignments, &self.known_nonzero);
                        if !check.is_zero() {
                            self.basis.push((check, Origin::Consistency { var: j }));
                        }
                    }
                    self.known_squares.insert(j, alpha);
                    changed = true;
                }
            }
        }
        Ok(changed)
    }

    /// One reduction sweep over the whole basis against the current
    /// tables, in parallel chunks, dropping zeros and duplicates. Chunk
    /// boundaries never influence the outcome: results are reassembled in
    /// input order.
    fn reduce_basis(&mut self) -> Result<(), SolveError> {
        let input = std::mem::take(&mut self.basis);
        let n = input.len();
        let workers = self.opts.workers;
        let reduced: Vec<(SparsePoly, Origin)> = if workers <= 1 || n < 64 {
            input
                .into_iter()
                .map(|(p, o)| {
                    (
                        p.update_reduce(&self.known_squares, &self.assignments, &self.known_nonzero),
                        o,
                    )
                })
                .collect()
        } else {
            let chunk = n / (workers * workers) + 1;
            let chunks: Vec<&[(SparsePoly, Origin)]> = input.chunks(chunk).collect();
            let slots: Vec<Mutex<Vec<(SparsePoly, Origin)>>> =
                chunks.iter().map(|_| Mutex::new(Vec::new())).collect();
            let cursor = AtomicUsize::new(0);
            let squares = &self.known_squares;
            let assignments = &self.assignments;
            let nonzero = &self.known_nonzero;
            std::thread::scope(|scope| {
                for _ in 0..workers {
                    scope.spawn(|| loop {
                        let c = cursor.fetch_add(1, AtomicOrdering::Relaxed);
                        if c >= chunks.len() {
                            break;
                        }
                        let out: Vec<(SparsePoly, Origin)> = chunks[c]
                            .iter()
                            .map(|(p, o)| (p.update_reduce(squares, assignments, nonzero), o.clone()))
                            .collect();
                        *slots[c].lock().expect("no poisoned chunks") = out;
                    });
                }
            });
            slots
                .into_iter()
                .flat_map(|m| m.into_inner().expect("no poisoned chunks"))
                .collect()
        };

        let mut seen: HashSet<SparsePoly> = HashSet::with_capacity(reduced.len());
        let mut kept = Vec::with_capacity(reduced.len());
        let mut var_degs: BTreeMap<u32, u32> = BTreeMap::new();
        for (p, origin) in reduced {
            if p.is_zero() {
                continue;
            }
            if p.is_constant() {
                return Err(SolveError::Inconsistent(format!(
                    "nonzero constant from {}",
                    origin.describe(self.ring, &self.index)
                )));
            }
            if !seen.insert(p.clone()) {
                continue;
            }
            for (m, _) in p.terms() {
                for &(v, e) in m.pairs() {
                    let d = var_degs.entry(v).or_insert(0);
                    *d = (*d).max(e);
                }
            }
            kept.push((p, origin));
        }
        self.var_degs = var_degs;
        self.basis = kept;
        Ok(())
    }

    /// One per-component lex Groebner pass over the residual basis.
    /// Components past the variable limit ride along untouched; the rest
    /// are replaced by their reduced bases (kept verbatim when the basis
    /// comes back unchanged, preserving the original provenance).
    /// Returns whether anything was replaced.
    fn component_groebner(&mut self, stage: u8, var_limit: usize) -> Result<bool, SolveError> {
        if self.basis.is_empty() {
            return Ok(false);
        }
        let mut ds = DisjointSet::new(self.nvars as u32);
        for (p, _) in &self.basis {
            let mut vars = p.support().into_iter();
            if let Some(first) = vars.next() {
                for v in vars {
                    ds.union(first, v);
                }
            }
        }
        let mut groups: BTreeMap<u32, (BTreeSet<u32>, Vec<usize>)> = BTreeMap::new();
        for (i, (p, _)) in self.basis.iter().enumerate() {
            let support = p.support();
            let root = ds.find(*support.iter().next().expect("nonconstant relation"));
            let entry = groups.entry(root).or_default();
            entry.0.extend(support);
            entry.1.push(i);
        }
        let mut components: Vec<(BTreeSet<u32>, Vec<usize>)> = groups.into_values().collect();
        components.sort_by_key(|(vars, _)| (vars.len(), *vars.iter().next().unwrap()));

        let old = std::mem::take(&mut self.basis);
        let mut changed = false;
        for (vars, eq_idxs) in components {
            let polys: Vec<SparsePoly> = eq_idxs.iter().map(|&i| old[i].0.clone()).collect();
            match buchberger(&polys, var_limit, TermOrder::Lex) {
                GroebnerOutcome::Skipped { var_count, .. } => {
                    self.chat(|| {
                        format!(
                            "stage {stage}: left a {var_count}-variable component unprocessed"
                        )
                    });
                    for &i in &eq_idxs {
                        self.basis.push(old[i].clone());
                    }
                }
                GroebnerOutcome::Basis(gb) => {
                    if is_inconsistent(&gb) {
                        let witnesses: Vec<String> = eq_idxs
                            .iter()
                            .take(3)
                            .map(|&i| old[i].1.describe(self.ring, &self.index))
                            .collect();
                        return Err(SolveError::Inconsistent(format!(
                            "the component containing {} reduces to 1 = 0; drawn from {}",
                            var_label(self.ring, &self.index, *vars.iter().next().unwrap()),
                            witnesses.join("; ")
                        )));
                    }
                    // Compare in the canonical monic form: Groebner output
                    // is normalized for lex, the working basis for
                    // degrevlex, and the two differ only by scale.
                    let same = gb.len() == eq_idxs.len()
                        && gb
                            .iter()
                            .all(|p| eq_idxs.iter().any(|&i| old[i].0 == p.monic()));
                    if same {
                        for &i in &eq_idxs {
                            self.basis.push(old[i].clone());
                        }
                    } else {
                        changed = true;
                        let root = *vars.iter().next().unwrap();
                        for p in gb {
                            self.basis.push((p, Origin::Component { stage, root }));
                        }
                    }
                }
            }
        }
        Ok(changed)
    }

    /// Groebner-then-eliminate rounds over the residual basis until it
    /// empties or reaches a fixed point: per-component lex bases expose
    /// triangular relations, the elimination loop consumes them, repeat.
    /// The seen-set guard also catches longer cycles.
    fn groebner_elim_rounds(&mut self, stage: u8, var_limit: usize) -> Result<(), SolveError> {
        let mut seen: HashSet<Vec<SparsePoly>> = HashSet::new();
        loop {
            if self.basis.is_empty() {
                return Ok(());
            }
            let snapshot: Vec<SparsePoly> =
                self.basis.iter().map(|(p, _)| p.clone()).collect();
            if !seen.insert(snapshot) {
                return Ok(());
            }
            if self.component_groebner(stage, var_limit)? {
                // Groebner output may carry reducible squares; normalize
                // before scanning.
                self.reduce_basis()?;
            }
            loop {
                let finds = self.scan_easy()?;
                if finds.is_empty() {
                    break;
                }
                let changed = self.integrate(finds)?;
                self.reduce_basis()?;
                if !changed {
                    break;
                }
            }
        }
    }
}

/// Evaluates a polynomial at grounded points; every variable it mentions
/// must be present.
fn eval_poly(
    p: &SparsePoly,
    values: &BTreeMap<u32, TowerNumber>,
    ctx: &Arc<TowerContext>,
) -> Result<TowerNumber, SolveError> {
    let mut acc = TowerNumber::zero(ctx);
    for (m, c) in p.terms() {
        let mut term = TowerNumber::from_cyclo(ctx, c.clone());
        for &(v, e) in m.pairs() {
            let val = values.get(&v).ok_or_else(|| {
                SolveError::Stalled(format!("x{v} has no grounded value"))
            })?;
            let val = val.lift(ctx);
            for _ in 0..e {
                term = term.mul(&val);
            }
        }
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// Splits `p` into the tower-evaluated coefficients of `x_j^2`, `x_j`,
/// and `1`, with every other variable read from `grounded`.
fn split_by_var(
    p: &SparsePoly,
    j: u32,
    grounded: &BTreeMap<u32, TowerNumber>,
    ctx: &Arc<TowerContext>,
) -> Result<(TowerNumber, TowerNumber, TowerNumber), SolveError> {
    let mut parts = [
        TowerNumber::zero(ctx),
        TowerNumber::zero(ctx),
        TowerNumber::zero(ctx),
    ];
    for (m, c) in p.terms() {
        let mut term = TowerNumber::from_cyclo(ctx, c.clone());
        let mut deg_j = 0usize;
        for &(v, e) in m.pairs() {
            if v == j {
                deg_j = e as usize;
                continue;
            }
            let val = grounded
                .get(&v)
                .ok_or_else(|| SolveError::Stalled(format!("x{v} has no grounded value")))?
                .lift(ctx);
            for _ in 0..e {
                term = term.mul(&val);
            }
        }
        if deg_j > 2 {
            return Err(SolveError::Stalled(format!(
                "a residual relation has degree {deg_j} in its last unknown"
            )));
        }
        parts[deg_j] = parts[deg_j].add(&term);
    }
    let [c0, c1, c2] = parts;
    Ok((c2, c1, c0))
}

/// Returns a square root of `alpha`, extending the tower when the current
/// one has none and lifting every grounded value into the extension.
fn ground_root(
    ctx: &mut Arc<TowerContext>,
    grounded: &mut BTreeMap<u32, TowerNumber>,
    radicals: &mut usize,
    alpha: &TowerNumber,
) -> Result<TowerNumber, SolveError> {
    let alpha = alpha.lift(ctx);
    if let Some(root) = alpha.sqrt() {
        return Ok(root);
    }
    let (next, y) = ctx.with_radical(&alpha).map_err(|e| {
        SolveError::Inconsistent(format!("cannot adjoin a radical: {e}"))
    })?;
    *ctx = next;
    *radicals += 1;
    for v in grounded.values_mut() {
        *v = v.lift(ctx);
    }
    Ok(y)
}

/// Deterministic union-find over variable indices `1..=n`; the smallest
/// member of a set is its root.
struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new(n: u32) -> Self {
        DisjointSet {
            parent: (0..=n).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
    }
}

// ---------------------------------------------------------------------------
// The finished table
// ---------------------------------------------------------------------------

/// One F-block: the matrix `[F^{abc}_d]` with its row and column labels.
#[derive(Clone, Debug)]
pub struct FBlock {
    /// Row labels `e` with `e` in `a x b` and `d` in `e x c`.
    pub rows: Vec<Label>,
    /// Column labels `f` with `f` in `b x c` and `d` in `a x f`.
    pub cols: Vec<Label>,
    pub matrix: TowerMatrix,
}

/// A complete, exact F-symbol table for one ring.
#[derive(Clone, Debug)]
pub struct FSymbolTable {
    ring: FusionRingData,
    index: SextupleIndex,
    ctx: Arc<TowerContext>,
    values: Vec<TowerNumber>,
}

impl PartialEq for FSymbolTable {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.values == other.values
    }
}

impl Eq for FSymbolTable {}

impl FSymbolTable {
    pub fn ring(&self) -> &FusionRingData {
        &self.ring
    }

    pub fn context(&self) -> &Arc<TowerContext> {
        &self.ctx
    }

    pub fn index(&self) -> &SextupleIndex {
        &self.index
    }

    /// Solved values in sextuple-enumeration order.
    pub fn values(&self) -> &[TowerNumber] {
        &self.values
    }

    /// The F-symbol for any sextuple: zero when inadmissible, one on the
    /// triangle entries (a vacuum among the upper labels), the solved
    /// value otherwise.
    pub fn entry(&self, s: &Sextuple) -> TowerNumber {
        if !self.ring.is_admissible_sextuple(s) {
            return TowerNumber::zero(&self.ctx);
        }
        let vac = self.ring.vacuum();
        if s[0] == vac || s[1] == vac || s[2] == vac {
            return TowerNumber::one(&self.ctx);
        }
        let i = self
            .index
            .sextuple_to_idx(s)
            .expect("admissible non-vacuum sextuples are enumerated");
        self.values[i].clone()
    }

    /// The full block `[F^{abc}_d]`, rows and columns in label order.
    pub fn block(&self, a: Label, b: Label, c: Label, d: Label) -> FBlock {
        let rows: Vec<Label> = self
            .ring
            .fuse(a, b)
            .into_iter()
            .filter(|&e| self.ring.n(e, c, d))
            .collect();
        let cols: Vec<Label> = self
            .ring
            .fuse(b, c)
            .into_iter()
            .filter(|&f| self.ring.n(a, f, d))
            .collect();
        let matrix = TowerMatrix::from_fn(&self.ctx, rows.len(), cols.len(), |i, j| {
            self.entry(&[a, b, c, d, rows[i], cols[j]])
        });
        FBlock { rows, cols, matrix }
    }

    /// Re-checks every axiom against the finished table, exactly.
    pub fn verify(&self, workers: usize) -> Result<VerifyReport, SolveError> {
        let mut report = VerifyReport::default();
        let name_of = |v: u32| var_label(&self.ring, &self.index, v);

        let mut check_system = |label: &'static str, sys: EquationSystem| {
            for (p, prov) in sys.polys.iter().zip(&sys.provenance) {
                let grounded = self.eval_equation(p);
                report.note(label, grounded.is_zero(), || {
                    format!(
                        "{label}: {} has nonzero residual, from {}",
                        p.render(&name_of),
                        prov.describe(&self.ring)
                    )
                });
            }
        };
        check_system(
            "pentagon",
            eqgen::gen_pentagon(&self.ring, &self.index, None, workers),
        );
        check_system(
            "hexagon+",
            eqgen::gen_hexagon(&self.ring, &self.index, HexSign::Plus, workers)?,
        );
        check_system(
            "hexagon-",
            eqgen::gen_hexagon(&self.ring, &self.index, HexSign::Minus, workers)?,
        );
        check_system(
            "orthogonality",
            eqgen::gen_orthogonality(&self.ring, &self.index, workers),
        );

        // Rigidity: [F^{a,a*,a}_a]_{11} agrees with [(F^{a*,a,a*}_{a*})^-1]_{11}.
        let vac = self.ring.vacuum();
        for a in self.ring.labels() {
            if a == vac {
                continue;
            }
            let ad = self.ring.dual(a);
            let lhs = self.entry(&[a, ad, a, a, vac, vac]);
            let blk = self.block(ad, a, ad, ad);
            let row = blk.rows.iter().position(|&e| e == vac);
            let col = blk.cols.iter().position(|&f| f == vac);
            let ok = match (blk.matrix.inverse(), row, col) {
                (Some(inv), Some(r), Some(c)) => *inv.at(c, r) == lhs,
                _ => false,
            };
            report.note("rigidity", ok, || {
                format!(
                    "rigidity fails at label {}",
                    self.ring.label_name(a)
                )
            });
        }

        // Pivotal identity over admissible triples, via the unique
        // admissible entry of each total-charge-vacuum block.
        for a in self.ring.labels() {
            for b in self.ring.labels() {
                for c in self.ring.fuse(a, b) {
                    let u = |x: Label, y: Label, z: Label| {
                        self.entry(&[x, y, z, vac, self.ring.dual(z), self.ring.dual(x)])
                    };
                    let cd = self.ring.dual(c);
                    let product = u(a, b, cd).mul(&u(b, cd, a)).mul(&u(cd, a, b));
                    let signs = i64::from(self.ring.pivotal(a))
                        * i64::from(self.ring.pivotal(b))
                        * i64::from(self.ring.pivotal(c));
                    let expected = TowerNumber::from_rational(
                        &self.ctx,
                        BigRational::from_integer(BigInt::from(signs)),
                    );
                    report.note("pivotal", product == expected, || {
                        format!(
                            "pivotal identity fails at ({}, {}, {})",
                            self.ring.label_name(a),
                            self.ring.label_name(b),
                            self.ring.label_name(c)
                        )
                    });
                }
            }
        }

        // Informational: are all solved values real?
        report.all_real = self.values.iter().all(|v| {
            let (_, im) = v.to_f64();
            im.abs() < 1e-9
        });
        Ok(report)
    }

    /// Evaluates a generated equation at the solved values.
    fn eval_equation(&self, p: &SparsePoly) -> TowerNumber {
        let mut acc = TowerNumber::zero(&self.ctx);
        for (m, c) in p.terms() {
            let mut term = TowerNumber::from_cyclo(&self.ctx, c.clone());
            for &(v, e) in m.pairs() {
                let val = &self.values[v as usize - 1];
                for _ in 0..e {
                    term = term.mul(val);
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// Rescales the table by a vertex gauge. Each admissible triple
    /// `(a, b, c)` with `c` in `a x b` may carry a nonzero factor
    /// `f^{ab}_c`; missing triples default to 1, and triples containing
    /// the vacuum must be 1.
    pub fn apply_gauge(&self, gauge: &Gauge) -> Result<FSymbolTable, SolveError> {
        let vac = self.ring.vacuum();
        for (&(a, b, c), v) in &gauge.factors {
            let (la, lb, lc) = (self.ring.label(a), self.ring.label(b), self.ring.label(c));
            if !self.ring.n(la, lb, lc) {
                return Err(SolveError::BadGauge(format!(
                    "({}, {}, {}) is not an admissible triple",
                    self.ring.label_name(la),
                    self.ring.label_name(lb),
                    self.ring.label_name(lc)
                )));
            }
            if v.is_zero() {
                return Err(SolveError::BadGauge(format!(
                    "gauge factor at ({}, {}, {}) is zero",
                    self.ring.label_name(la),
                    self.ring.label_name(lb),
                    self.ring.label_name(lc)
                )));
            }
            if (la == vac || lb == vac) && !v.is_one() {
                return Err(SolveError::BadGauge(
                    "gauge factors on vacuum triples must be 1".into(),
                ));
            }
        }
        let factor = |a: Label, b: Label, c: Label| -> TowerNumber {
            match gauge.factors.get(&(a.index(), b.index(), c.index())) {
                Some(v) => v.lift(&self.ctx),
                None => TowerNumber::one(&self.ctx),
            }
        };
        let mut values = Vec::with_capacity(self.values.len());
        for (i, s) in self.index.iter() {
            let [a, b, c, d, e, f] = *s;
            let numer = factor(b, c, f).mul(&factor(a, f, d));
            let denom = factor(a, b, e).mul(&factor(e, c, d));
            let v = self.values[i]
                .mul(&numer)
                .mul(&denom.inv().map_err(|_| {
                    SolveError::BadGauge("gauge factor is not invertible".into())
                })?);
            values.push(v);
        }
        Ok(FSymbolTable {
            ring: self.ring.clone(),
            index: self.index.clone(),
            ctx: Arc::clone(&self.ctx),
            values,
        })
    }

    pub fn to_json(&self) -> String {
        let file = TableFile {
            ring: self.ring.name().to_string(),
            cyclo_order: self.ring.cyclo_order(),
            radicals: radicals_to_ser(&self.ctx),
            fsymbols: self
                .index
                .iter()
                .map(|(i, s)| FSymbolEntry {
                    sextuple: s.map(|l| l.index()),
                    value: self.values[i].to_terms_ser(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("table serialization cannot fail")
    }

    /// Reads a table back; `ring` must be the ring it was solved for.
    pub fn from_json(text: &str, ring: &FusionRingData) -> Result<FSymbolTable, SolveError> {
        let file: TableFile =
            serde_json::from_str(text).map_err(|e| SolveError::Malformed(e.to_string()))?;
        if file.ring != ring.name() {
            return Err(SolveError::Malformed(format!(
                "table was solved for ring {:?}, not {:?}",
                file.ring,
                ring.name()
            )));
        }
        if file.cyclo_order != ring.cyclo_order() {
            return Err(SolveError::Malformed(format!(
                "table works in Q(zeta_{}), the ring in Q(zeta_{})",
                file.cyclo_order,
                ring.cyclo_order()
            )));
        }
        let ctx = radicals_from_ser(file.cyclo_order, &file.radicals)
            .map_err(|e| SolveError::Malformed(e.to_string()))?;
        let index = index_sextuples(ring);
        let mut values = vec![TowerNumber::zero(&ctx); index.len()];
        let mut filled = vec![false; index.len()];
        for entry in &file.fsymbols {
            let s: Sextuple = entry.sextuple.map(|i| {
                assert!(i < ring.rank(), "label index out of range");
                ring.label(i)
            });
            let i = index.sextuple_to_idx(&s).ok_or_else(|| {
                SolveError::Malformed(format!(
                    "sextuple {:?} is not an enumerated unknown",
                    entry.sextuple
                ))
            })?;
            values[i] = TowerNumber::from_terms_ser(&ctx, &entry.value)
                .map_err(|e| SolveError::Malformed(e.to_string()))?;
            filled[i] = true;
        }
        if let Some(i) = filled.iter().position(|&f| !f) {
            return Err(SolveError::Malformed(format!(
                "table is missing a value for {}",
                var_label(ring, &index, i as u32 + 1)
            )));
        }
        Ok(FSymbolTable {
            ring: ring.clone(),
            index,
            ctx,
            values,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    ring: String,
    cyclo_order: u32,
    radicals: Vec<TowerTermsSer>,
    fsymbols: Vec<FSymbolEntry>,
}

#[derive(Serialize, Deserialize)]
struct FSymbolEntry {
    sextuple: [usize; 6],
    value: TowerTermsSer,
}

/// Vertex gauge factors keyed by admissible triple `(a, b, c)` (label
/// indices, `c` in `a x b`); missing keys mean 1.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Gauge {
    factors: BTreeMap<(usize, usize, usize), TowerNumber>,
}

impl Gauge {
    /// The identity gauge.
    pub fn identity() -> Gauge {
        Gauge::default()
    }

    /// Builds a gauge from a function over admissible triples.
    pub fn from_fn(
        ring: &FusionRingData,
        mut f: impl FnMut(Label, Label, Label) -> TowerNumber,
    ) -> Gauge {
        let mut factors = BTreeMap::new();
        for a in ring.labels() {
            for b in ring.labels() {
                for c in ring.fuse(a, b) {
                    factors.insert((a.index(), b.index(), c.index()), f(a, b, c));
                }
            }
        }
        Gauge { factors }
    }

    pub fn get(&self, a: Label, b: Label, c: Label) -> Option<&TowerNumber> {
        self.factors.get(&(a.index(), b.index(), c.index()))
    }

    /// The factor-wise inverse gauge.
    pub fn inverse(&self) -> Result<Gauge, SolveError> {
        let mut factors = BTreeMap::new();
        for (&k, v) in &self.factors {
            let inv = v
                .inv()
                .map_err(|_| SolveError::BadGauge("gauge factor is not invertible".into()))?;
            factors.insert(k, inv);
        }
        Ok(Gauge { factors })
    }
}

/// Outcome of [`FSymbolTable::verify`]: per-axiom counts and failures.
#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    /// (axiom, equations checked) in check order.
    pub checked: Vec<(&'static str, usize)>,
    pub failures: Vec<String>,
    /// Informational: every solved value is real to double precision.
    pub all_real: bool,
}

impl VerifyReport {
    fn note(&mut self, label: &'static str, ok: bool, detail: impl FnOnce() -> String) {
        match self.checked.iter_mut().find(|(l, _)| *l == label) {
            Some((_, n)) => *n += 1,
            None => self.checked.push((label, 1)),
        }
        if !ok {
            self.failures.push(detail());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (label, n) in &self.checked {
            writeln!(f, "{label}: {n} identities checked")?;
        }
        writeln!(
            f,
            "values: {}",
            if self.all_real { "all real" } else { "complex" }
        )?;
        if self.failures.is_empty() {
            write!(f, "all identities hold")?;
        } else {
            writeln!(f, "{} failures:", self.failures.len())?;
            for (i, failure) in self.failures.iter().enumerate() {
                if i == 20 {
                    write!(f, "  ... and {} more", self.failures.len() - i)?;
                    break;
                }
                writeln!(f, "  {failure}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{builtin, FusionRingData};

    fn rational(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn solve_builtin(name: &str) -> SolvedRing {
        let ring = builtin(name).expect("catalog ring");
        solve(&ring, &SolveOptions::default()).expect("catalog rings solve")
    }

    #[test]
    fn trivial_ring_solves_to_an_empty_table() {
        let ring = FusionRingData::new(
            "unit",
            vec!["1".into()],
            &[[0, 0, 0]],
            vec![0],
            4,
            BTreeMap::from([((0, 0, 0), rational(0, 1))]),
            vec![rational(0, 1)],
            vec![1],
        )
        .expect("valid ring");
        let solved = solve(&ring, &SolveOptions::default()).expect("solves");
        assert_eq!(solved.stats.variables, 0);
        assert!(solved.table.values().is_empty());
        let report = solved.table.verify(1).expect("verifies");
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn fibonacci_end_to_end() {
        let solved = solve_builtin("fibonacci");
        let table = &solved.table;
        let ring = table.ring();
        assert_eq!(solved.stats.variables, 5);
        // The hexagons alone pin more than half the unknowns.
        assert!(
            2 * solved.stats.stage1_assigned > solved.stats.variables,
            "stage 1 assigned only {} of {}",
            solved.stats.stage1_assigned,
            solved.stats.variables
        );
        assert_eq!(solved.stats.stage2_residual, 0);
        assert!(solved.stats.stage3_quadratic_only);

        let tau = ring.label_by_name("tau").expect("label");
        let one = ring.label_by_name("one").expect("label");

        // F^{tau tau tau}_one is the 1x1 block [1].
        let scalar = table.entry(&[tau, tau, tau, one, tau, tau]);
        assert!(scalar.is_one());

        // The 2x2 block: symmetric, orthogonal, and its corner satisfies
        // the golden-ratio polynomial x^2 + x - 1 = 0.
        let blk = table.block(tau, tau, tau, tau);
        assert_eq!(blk.rows, vec![one, tau]);
        assert_eq!(blk.cols, vec![one, tau]);
        let m = &blk.matrix;
        assert_eq!(m.at(0, 1), m.at(1, 0), "block is symmetric");
        assert!(m.mul(&m.transpose()).is_identity(), "block is orthogonal");
        let p = m.at(0, 0).clone();
        let residue = p.mul(&p).add(&p).sub(&TowerNumber::one(table.context()));
        assert!(residue.is_zero(), "corner solves x^2 + x - 1 = 0");
        assert_eq!(m.at(1, 1), &p.neg(), "corners are opposite");

        let report = table.verify(1).expect("verifies");
        assert!(report.passed(), "{report}");
        assert!(report.all_real);
    }

    #[test]
    fn ising_end_to_end() {
        let solved = solve_builtin("ising");
        let table = &solved.table;
        let ring = table.ring();
        assert_eq!(solved.stats.stage2_residual, 0);
        assert!(solved.stats.stage3_quadratic_only);

        let one = ring.label_by_name("one").expect("label");
        let sigma = ring.label_by_name("sigma").expect("label");
        let psi = ring.label_by_name("psi").expect("label");

        // F^{sigma sigma sigma}_sigma = (1/sqrt2) [[1, 1], [1, -1]] up to
        // solver branch choices; pin what is branch-free.
        let blk = table.block(sigma, sigma, sigma, sigma);
        assert_eq!(blk.rows, vec![one, psi]);
        let m = &blk.matrix;
        assert!(m.mul(&m.transpose()).is_identity());
        let corner = m.at(0, 0).clone();
        let half = TowerNumber::from_rational(table.context(), rational(1, 2));
        assert_eq!(corner.mul(&corner), half, "corner squares to 1/2");
        assert_eq!(m.at(0, 0), m.at(0, 1));
        assert_eq!(m.at(0, 0), m.at(1, 0));
        assert_eq!(m.at(1, 1), &corner.neg());

        // F^{psi sigma psi}_sigma is the famous -1.
        let v = table.entry(&[psi, sigma, psi, sigma, sigma, sigma]);
        assert!(v.mul(&v).is_one());

        let report = table.verify(1).expect("verifies");
        assert!(report.passed(), "{report}");
        assert!(report.all_real);
    }

    #[test]
    fn su2_4_has_a_vanishing_f_symbol() {
        let solved = solve_builtin("su2-4");
        let table = &solved.table;
        let ring = table.ring();
        let y = ring.label_by_name("Y").expect("label");

        // F^{YYY}_Y is 3x3 over rows/cols {one, Y, Z}, and its center
        // entry vanishes. Zero entries are why common monomial factors
        // must never be cancelled blindly during the solve — this block
        // is the regression witness.
        let blk = table.block(y, y, y, y);
        assert_eq!(blk.rows.len(), 3);
        assert!(blk.matrix.at(1, 1).is_zero(), "center entry vanishes");
        assert!(!blk.matrix.at(0, 0).is_zero());
        assert!(
            blk.matrix.mul(&blk.matrix.transpose()).is_identity(),
            "block is orthogonal despite the zero"
        );

        let report = table.verify(1).expect("verifies");
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn every_catalog_ring_solves_and_verifies() {
        for name in crate::catalog::builtin_names() {
            let solved = solve_builtin(name);
            let report = solved.table.verify(1).expect("verifies");
            assert!(report.passed(), "{name}: {report}");
            let stats = &solved.stats;
            assert!(
                2 * stats.stage1_assigned > stats.variables,
                "{name}: stage 1 solved {}/{}",
                stats.stage1_assigned,
                stats.variables
            );
            // The pentagon residual empties out entirely in stage 2 for
            // every catalog ring — the closing lex pass unwinds even the
            // sign couplings — leaving stage 3 nothing but known squares.
            assert_eq!(
                stats.stage2_residual, 0,
                "{name}: pentagon residual is nonempty"
            );
            assert!(
                stats.stage3_quadratic_only,
                "{name}: stage 3 saw non-quadratic input"
            );
        }
    }

    #[test]
    fn worker_counts_agree_exactly() {
        let ring = builtin("fibonacci").expect("catalog ring");
        let mut tables = Vec::new();
        for workers in [1usize, 2, 8] {
            let opts = SolveOptions {
                workers,
                ..SolveOptions::default()
            };
            let solved = solve(&ring, &opts).expect("solves");
            tables.push((workers, solved));
        }
        let (_, reference) = &tables[0];
        for (workers, solved) in &tables[1..] {
            assert_eq!(
                solved.table, reference.table,
                "table differs at {workers} workers"
            );
            assert_eq!(
                solved.stats, reference.stats,
                "stats differ at {workers} workers"
            );
        }
    }

    #[test]
    fn identity_gauge_is_a_fixed_point() {
        let solved = solve_builtin("fibonacci");
        let gauged = solved
            .table
            .apply_gauge(&Gauge::identity())
            .expect("identity gauge applies");
        assert_eq!(gauged, solved.table);
    }

    #[test]
    fn sign_gauge_round_trips_and_still_verifies() {
        let solved = solve_builtin("ising");
        let table = &solved.table;
        let ctx = table.context();
        let sigma = table.ring().label_by_name("sigma").expect("label");
        let psi = table.ring().label_by_name("psi").expect("label");
        // A symmetric +-1 gauge: flip the sign of the sigma x sigma -> psi
        // vertex and nothing else.
        let gauge = Gauge::from_fn(table.ring(), |a, b, c| {
            let sign = if a == sigma && b == sigma && c == psi {
                rational(-1, 1)
            } else {
                rational(1, 1)
            };
            TowerNumber::from_rational(ctx, sign)
        });
        let gauged = table.apply_gauge(&gauge).expect("sign gauge applies");
        assert_ne!(gauged, *table, "the gauge actually moves the table");
        let report = gauged.verify(1).expect("verifies");
        assert!(report.passed(), "{report}");
        let back = gauged
            .apply_gauge(&gauge.inverse().expect("signs invert"))
            .expect("inverse applies");
        assert_eq!(back, *table);
    }

    #[test]
    fn vacuum_gauge_factors_must_be_one() {
        let solved = solve_builtin("fibonacci");
        let table = &solved.table;
        let ring = table.ring();
        let vac = ring.vacuum();
        let tau = ring.label_by_name("tau").expect("label");
        let mut gauge = Gauge::identity();
        gauge.factors.insert(
            (vac.index(), tau.index(), tau.index()),
            TowerNumber::from_rational(table.context(), rational(-1, 1)),
        );
        assert!(matches!(
            table.apply_gauge(&gauge),
            Err(SolveError::BadGauge(_))
        ));
        let mut zero_gauge = Gauge::identity();
        zero_gauge.factors.insert(
            (tau.index(), tau.index(), tau.index()),
            TowerNumber::zero(table.context()),
        );
        assert!(matches!(
            table.apply_gauge(&zero_gauge),
            Err(SolveError::BadGauge(_))
        ));
    }

    #[test]
    fn json_round_trip_preserves_the_table() {
        let solved = solve_builtin("fibonacci");
        let text = solved.table.to_json();
        let back = FSymbolTable::from_json(&text, solved.table.ring()).expect("parses");
        assert_eq!(back, solved.table);
        // Wrong ring is rejected.
        let other = builtin("ising").expect("catalog ring");
        assert!(matches!(
            FSymbolTable::from_json(&text, &other),
            Err(SolveError::Malformed(_))
        ));
    }

    #[test]
    fn broken_r_symbols_are_rejected_as_inconsistent() {
        // Fibonacci with R^{tau tau}_one spoiled: the hexagons admit no
        // solution, and the solver must say so rather than limp on.
        let good = builtin("fibonacci").expect("catalog ring");
        let r_symbols = BTreeMap::from([
            ((0, 0, 0), rational(0, 1)),
            ((0, 1, 1), rational(0, 1)),
            ((1, 0, 1), rational(0, 1)),
            // Wrong: the catalog value is 3/5.
            ((1, 1, 0), rational(1, 10)),
            ((1, 1, 1), rational(3, 10)),
        ]);
        let ring = FusionRingData::new(
            "fibonacci-broken",
            vec!["one".into(), "tau".into()],
            &[[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0], [1, 1, 1]],
            vec![0, 1],
            good.cyclo_order(),
            r_symbols,
            vec![rational(0, 1), rational(2, 5)],
            vec![1, 1],
        )
        .expect("structurally valid ring");
        match solve(&ring, &SolveOptions::default()) {
            Err(SolveError::Inconsistent(_)) => {}
            other => panic!("expected inconsistency, got {other:?}"),
        }
    }
}
