//! One pipeline per problem kind.

use serde_json::{json, Value};

use tqft_algebra::bcov::{
    bcov_vector_field, check_oa, check_potentiality, leaf_to_root_family, structure_constants, validate_bcov,
};
use tqft_algebra::commutativity::{
    build_a, check_commutativity, classify_mode, transferred_one_form, validate_comm_family, validate_strong_hodge,
    CommFamily, ConnectionOneForm, FamilyMode, HodgeData,
};
use tqft_algebra::complexes::{
    closeness_residual, edge_integral, evolution_form, limit_at_infinity, semigroup_residual, validate_sdr, Complex,
    Representation, Sdr,
};
use tqft_algebra::exactlin::{GradedMap, GradedSpace, Mat, MultiOp, Rational, Ring, Scalar, Series, SeriesCtx};
use tqft_algebra::models::PolyvectorModel;
use tqft_algebra::report::Report;
use tqft_algebra::saito::{
    c_operators, check_good_section, find_good_section, gm_frame, milnor_ring, GoodSection, SaitoData, SectionS,
};
use tqft_algebra::tqm::{check_closeness, check_factorization, check_gluing, DecoratedGraph};
use tqft_algebra::transfer::{
    check_linfty, check_mc, check_transferred_mc, eps_series, transferred_operations, OperationSet, RelationReport,
    SumMode,
};

use crate::report::RunReport;
use crate::schema::{self, engine, graded, payload, InputError, Num, OpIn, TermIn};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SaitoStage {
    Milnor,
    Coperators,
    Gmframe,
    Goodsection,
}

fn series_rows<R: Ring>(m: &Mat<R>) -> Value {
    json!((0..m.rows).map(|r| (0..m.cols).map(|c| m.get(r, c).render()).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn nonzero<R: Ring>(m: &Mat<R>) -> Value {
    json!(m.nonzero_entries().into_iter().map(|(r, c, v)| json!([r, c, v.render()])).collect::<Vec<_>>())
}

/// Pipeline errors after parsing count as input errors: the data was
/// well-formed but cannot be processed at the requested order.
fn run_err(what: &str) -> impl Fn(tqft_algebra::error::EngineError) -> InputError + '_ {
    move |e| InputError(format!("{}: {}", what, e))
}

pub fn run_sdr<C: Num>(v: &Value, order: u32) -> Result<RunReport, InputError> {
    let p: schema::SdrPayload = payload(v)?;
    let sdr: Sdr<C> = schema::sdr(&p.sdr, "payload.sdr")?;
    let mut out = RunReport::new("sdr", C::FIELD, order);
    sdr_checks(&sdr, order, &mut out)?;
    Ok(out)
}

fn sdr_checks<C: Num>(sdr: &Sdr<C>, order: u32, out: &mut RunReport) -> Result<(), InputError> {
    let rep = validate_sdr(sdr).map_err(run_err("sdr"))?;
    let valid = rep.passed();
    out.add("complexes", "", rep);
    if !valid {
        return Ok(());
    }
    let proj = sdr.proj_c();
    for mode in [Representation::Idempotent, Representation::Truncated(order)] {
        let tag = match mode {
            Representation::Idempotent => "idempotent".to_string(),
            Representation::Truncated(n) => format!("truncated {}", n),
        };
        let mut r = Report::new();
        r.map_residual(&format!("semigroup law ({})", tag), &semigroup_residual(&proj, mode).map_err(run_err("semigroup"))?);
        let f = evolution_form(&proj, &sdr.h, mode).map_err(run_err("evolution"))?;
        r.map_residual(&format!("(d+Q)-closeness ({})", tag), &closeness_residual(&sdr.v.q, &f).map_err(run_err("evolution"))?);
        out.add("complexes", "", r);
    }
    let integral = edge_integral(sdr).map_err(run_err("edge integral"))?;
    let mut r = Report::new();
    r.equal("edge integral = -h", &integral.mat, &sdr.h.neg().mat);
    let lim = limit_at_infinity(sdr).map_err(run_err("limit"))?;
    r.equal("limit at infinity = i pi", &lim.mat, &sdr.i.compose_unchecked(&sdr.pi).mat);
    out.add("complexes", "", r);
    out.data("edge_integral", schema_rows(&integral.mat));
    Ok(())
}

fn schema_rows<C: Scalar>(m: &Mat<C>) -> Value {
    json!(schema::render(m))
}

fn eps_ctx(order: u32) -> std::sync::Arc<SeriesCtx> {
    SeriesCtx::new(&["eps"], order)
}

fn term_series<C: Num>(
    terms: &[TermIn],
    src: &GradedSpace,
    tgt: &GradedSpace,
    ctx: &std::sync::Arc<SeriesCtx>,
    path: &str,
) -> Result<GradedMap<Series<C>>, InputError> {
    let mut parts = Vec::new();
    for (k, t) in terms.iter().enumerate() {
        parts.push((t.eps, graded::<C>(&t.matrix, src, tgt, 1, &format!("{}[{}].matrix", path, k))?));
    }
    if parts.is_empty() {
        return Ok(GradedMap::zero(src, tgt, 1, &Series::zero(ctx)));
    }
    let refs: Vec<(u32, &GradedMap<C>)> = parts.iter().map(|(e, m)| (*e, m)).collect();
    Ok(eps_series(&refs, ctx))
}

fn operations<C: Num>(
    ops: &[OpIn],
    complex: &Complex<C>,
    ctx: &std::sync::Arc<SeriesCtx>,
    path: &str,
) -> Result<OperationSet<C>, InputError> {
    let space = &complex.space;
    let mut set = OperationSet::new(space, ctx, complex.q.clone());
    for (k, op) in ops.iter().enumerate() {
        let here = format!("{}[{}]", path, k);
        if op.arity < 2 {
            return Err(InputError::at(&format!("{}.arity", here), "operations start at arity 2; the differential is l1"));
        }
        if set.get(op.arity).is_some() {
            return Err(InputError::at(&format!("{}.arity", here), format!("arity {} given twice", op.arity)));
        }
        let m = term_series(&op.terms, &space.tensor_power(op.arity), space, ctx, &format!("{}.terms", here))?;
        let mop = MultiOp::new(space, op.arity, m).map_err(|e| engine(&here, e))?;
        set = set.with_op(mop);
    }
    set.validate().map_err(|e| engine(path, e))?;
    Ok(set)
}

fn relation_report<C: Scalar>(r: &RelationReport<C>) -> Report {
    let mut rep = Report::new();
    for (n, m) in &r.residuals {
        rep.map_residual(&format!("L-infinity relation arity {}", n), &m.map);
    }
    for n in &r.asymmetric {
        rep.fail(&format!("l{} graded symmetric", n), "operation is not graded-symmetric");
    }
    rep
}

pub fn run_transfer<C: Num>(v: &Value, order: u32) -> Result<RunReport, InputError> {
    let p: schema::TransferPayload = payload(v)?;
    let sdr: Sdr<C> = schema::sdr(&p.sdr, "payload.sdr")?;
    let mut out = RunReport::new("transfer", C::FIELD, order);
    let rep = validate_sdr(&sdr).map_err(run_err("sdr"))?;
    let valid = rep.passed();
    out.add("complexes", "", rep);
    if !valid {
        return Ok(out);
    }
    let ctx = eps_ctx(order);
    if !p.operations.is_empty() {
        let ops = operations(&p.operations, &sdr.v, &ctx, "payload.operations")?;
        let input = check_linfty(&ops, p.max_arity).map_err(run_err("input relations"))?;
        out.add("transfer", "input: ", relation_report(&input));
        let t = transferred_operations(&sdr, &ops, p.max_arity, order, SumMode::Shapes).map_err(run_err("transfer"))?;
        let rel = check_linfty(&t.ops, p.max_arity).map_err(run_err("transferred relations"))?;
        out.add("transfer", "transferred: ", relation_report(&rel));
        let mut ops_json = serde_json::Map::new();
        for (n, op) in &t.ops.ops {
            ops_json.insert(format!("l{}", n), nonzero(&op.map.mat));
        }
        out.data("transferred", Value::Object(ops_json));
    }
    if let Some(mc) = &p.mc {
        let phi = term_series::<C>(mc, &sdr.v.space, &sdr.v.space, &ctx, "payload.mc")?;
        if mc.iter().any(|t| t.eps == 0) {
            return Err(InputError::at("payload.mc", "a Maurer-Cartan element needs eps >= 1 in every term"));
        }
        let mut r = Report::new();
        r.map_residual("input Maurer-Cartan", &check_mc(&sdr.v, &phi, order).map_err(run_err("mc"))?);
        let (a1, res) = check_transferred_mc(&sdr, &phi, order).map_err(run_err("mc"))?;
        r.map_residual("transferred Maurer-Cartan", &res);
        out.add("transfer", "", r);
        out.data("transferred_mc", nonzero(&a1.mat));
    }
    Ok(out)
}

pub fn run_tqm<C: Num>(v: &Value, order: u32) -> Result<RunReport, InputError> {
    let p: schema::TqmPayload = payload(v)?;
    let sdr: Sdr<C> = schema::sdr(&p.sdr, "payload.sdr")?;
    let mut out = RunReport::new("tqm", C::FIELD, order);
    let rep = validate_sdr(&sdr).map_err(run_err("sdr"))?;
    let valid = rep.passed();
    out.add("complexes", "", rep);
    if !valid {
        return Ok(out);
    }
    let ctx = eps_ctx(order);
    let ops = operations(&p.operations, &sdr.v, &ctx, "payload.operations")?;
    let graph = DecoratedGraph::parse(&p.graph, p.edges.clone()).map_err(|e| engine("payload.graph", e))?;
    let mode = match p.mode {
        schema::ModeIn::Idempotent => Representation::Idempotent,
        schema::ModeIn::Truncated => Representation::Truncated(order),
    };
    out.add("tqm", "", check_closeness(&graph, &sdr, &ops, mode).map_err(run_err("closeness"))?);
    for e in 0..graph.edge_count() {
        out.add("tqm", "", check_gluing(&graph, e, &sdr, &ops, mode).map_err(run_err("gluing"))?);
    }
    if mode == Representation::Idempotent {
        for e in graph.internal_edges() {
            let r = check_factorization(&graph, e, &sdr, &ops).map_err(run_err("factorization"))?;
            out.add("tqm", &format!("factorization at {}: ", graph.edges[e]), r);
        }
    }
    Ok(out)
}

fn hodge<C: Num>(h: &schema::HodgeIn) -> Result<HodgeData<C>, InputError> {
    let v = schema::space(&h.space, "payload.hodge.space")?;
    let w = schema::space(&h.w, "payload.hodge.w")?;
    let q = graded(&h.q, &v, &v, 1, "payload.hodge.q")?;
    if let Some(win) = &h.window {
        if let Some(k) = win.iter().position(|&i| i >= v.dim()) {
            return Err(InputError::at(&format!("payload.hodge.window[{}]", k), "index outside the space"));
        }
    }
    Ok(HodgeData {
        complex: Complex::new(v.clone(), q).map_err(|e| engine("payload.hodge.q", e))?,
        g: graded(&h.g, &v, &v, 1, "payload.hodge.g")?,
        g_minus: graded(&h.g_minus, &v, &v, 1, "payload.hodge.g_minus")?,
        i_w: graded(&h.i_w, &w, &v, 0, "payload.hodge.i_w")?,
        pi_w: graded(&h.pi_w, &v, &w, 0, "payload.hodge.pi_w")?,
        w,
        window: h.window.clone(),
    })
}

fn one_form_json<C: Scalar>(a: &ConnectionOneForm<C>) -> Value {
    json!(a.components.iter().map(|m| nonzero(&m.mat)).collect::<Vec<_>>())
}

pub fn run_commutativity<C: Num>(v: &Value, order: u32) -> Result<RunReport, InputError> {
    let p: schema::CommutativityPayload = payload(v)?;
    let d: HodgeData<C> = hodge(&p.hodge)?;
    if p.family.linear.is_empty() {
        return Err(InputError::at("payload.family.linear", "a family needs at least one parameter"));
    }
    let space = d.space().clone();
    let mut ms = Vec::new();
    for (k, m) in p.family.linear.iter().enumerate() {
        ms.push(graded::<C>(m, &space, &space, 0, &format!("payload.family.linear[{}]", k))?);
    }
    let names: Vec<String> = (1..=ms.len()).map(|k| format!("t{}", k)).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let ctx = SeriesCtx::new(&refs, order + 1);
    let mut fam = CommFamily::linear(&ctx, &ms, FamilyMode::Simplified);
    fam.mode = match p.family.mode {
        schema::FamilyModeIn::Simplified => FamilyMode::Simplified,
        schema::FamilyModeIn::Full => FamilyMode::Full,
        schema::FamilyModeIn::Auto => classify_mode(&d, &fam.u, order).map_err(run_err("family"))?,
    };
    let mut out = RunReport::new("commutativity", C::FIELD, order);
    out.add("commutativity", "strong Hodge: ", validate_strong_hodge(&d).map_err(run_err("hodge"))?);
    out.add("commutativity", "family: ", validate_comm_family(&d, &fam, order).map_err(run_err("family"))?);
    out.data("mode", json!(if fam.mode == FamilyMode::Simplified { "simplified" } else { "full" }));
    // the product formula only exists for simplified families
    let a = match fam.mode {
        FamilyMode::Simplified => {
            let a = build_a(&d, &fam, order).map_err(run_err("build_A"))?;
            out.add("commutativity", "build_A: ", check_commutativity(&a, order));
            out.data("A", one_form_json(&a));
            Some(a)
        }
        FamilyMode::Full => None,
    };
    match transferred_one_form(&d, &fam, order) {
        Ok(t) => {
            out.add("commutativity", "transferred: ", check_commutativity(&t.one_form, order));
            if let Some(a) = &a {
                out.check("commutativity", "routes agree", t.one_form == *a, "build_A and the transferred one-form differ");
            }
            out.data("transferred", one_form_json(&t.one_form));
        }
        Err(e) => out.check("commutativity", "transferred one-form", false, &e.to_string()),
    }
    Ok(out)
}

/// `path` prefixes field names in errors; empty for command-line parameters.
pub fn polyvector(m: &schema::PolyvectorIn, path: &str) -> Result<PolyvectorModel, InputError> {
    let field = |f: &str| if path.is_empty() { f.to_string() } else { format!("{}.{}", path, f) };
    let mut w = Vec::new();
    for (k, s) in m.w_prime.iter().enumerate() {
        w.push(schema::scalar::<Rational>(s, &format!("{}[{}]", field("w_prime"), k))?);
    }
    PolyvectorModel::new(&w, m.cutoff).map_err(|e| engine(&field("cutoff"), e))
}

pub fn run_bcov(v: &Value, order: u32) -> Result<RunReport, InputError> {
    let p: schema::BcovPayload = payload(v)?;
    let model = polyvector(&p.model, "payload.model")?;
    let d = model.bcov(p.model.window);
    let mut out = RunReport::new("bcov", "q", order);
    out.add("bcov", "", validate_bcov(&d).map_err(run_err("bcov"))?);
    let vf = bcov_vector_field(&d, order + 1).map_err(run_err("vector field"))?;
    let f = structure_constants(&vf);
    out.add("bcov", "", check_oa(&f, order));
    if let Some(eta) = model.residue_pairing() {
        out.add("bcov", "", check_potentiality(&vf, &eta, order));
    }
    let fam = leaf_to_root_family(&d, order + 1).map_err(run_err("leaf-to-root family"))?;
    out.add("commutativity", "leaf-to-root family: ", validate_comm_family(&d.hodge, &fam, order).map_err(run_err("family"))?);
    let a = build_a(&d.hodge, &fam, order).map_err(run_err("build_A"))?;
    out.add("commutativity", "leaf-to-root build_A: ", check_commutativity(&a, order));
    out.data("structure_constants_at_zero", json!(f.at_zero().iter().map(schema_rows).collect::<Vec<_>>()));
    Ok(out)
}

pub fn run_saito(v: &Value, order: u32, stage: SaitoStage) -> Result<RunReport, InputError> {
    let p: schema::SaitoPayload = payload(v)?;
    if p.n < 3 {
        return Err(InputError::at("payload.n", "the singularity x^n needs n >= 3"));
    }
    let name = match stage {
        SaitoStage::Milnor => "saito milnor",
        SaitoStage::Coperators => "saito coperators",
        SaitoStage::Gmframe => "saito gmframe",
        SaitoStage::Goodsection => "saito goodsection",
    };
    let mut out = RunReport::new(name, "q", order);
    if stage == SaitoStage::Milnor {
        let ring = milnor_ring(p.n).map_err(|e| engine("payload.n", e))?;
        out.check("saito", "mu = n - 1", ring.mu == p.n - 1, &format!("mu = {}", ring.mu));
        let sym = (0..ring.mu).all(|a| (0..ring.mu).all(|b| ring.table[a][b] == ring.table[b][a]));
        out.check("saito", "commutative", sym, "table is not symmetric");
        let left: Vec<Value> = (0..ring.mu).map(|a| schema_rows(&ring.left_mult(a))).collect();
        out.data("mu", json!(ring.mu));
        out.data("left_multiplication", json!(left));
        return Ok(out);
    }
    let data = SaitoData::new(p.n, order).map_err(|e| engine("payload.n", e))?;
    match stage {
        SaitoStage::Milnor => unreachable!(),
        SaitoStage::Coperators => {
            let c = c_operators(&data).map_err(run_err("C operators"))?;
            let mut r = Report::new();
            for j in 0..c.len() {
                for k in j + 1..c.len() {
                    r.residual(&format!("[C{}, C{}] = 0", j + 2, k + 2), &(&(&c[j] * &c[k]) - &(&c[k] * &c[j])));
                }
            }
            if c.len() < 2 {
                r.pass("C operators commute");
            }
            out.add("saito", "", r);
            out.data("C", json!(c.iter().map(series_rows).collect::<Vec<_>>()));
        }
        SaitoStage::Gmframe => {
            let m = gm_frame(&data).map_err(run_err("frame"))?;
            let at0 = m.map(|s| s.truncate(0));
            let mut r = Report::new();
            r.equal("M = id at t = 0", &at0, &Mat::identity(data.mu, &data.zero()).map(|s| s.truncate(0)));
            out.add("saito", "", r);
            out.data("M", series_rows(&m));
        }
        SaitoStage::Goodsection => {
            let s = match p.search_bound {
                None => SectionS::monomial(&data),
                Some(b) => match find_good_section(&data, b).map_err(run_err("search"))? {
                    GoodSection::Found(s) => s,
                    GoodSection::Obstructed { order: k } => {
                        out.check(
                            "saito",
                            "good section exists",
                            false,
                            &format!("obstructed at t-order {} with z-degree at most {}", k, b),
                        );
                        return Ok(out);
                    }
                },
            };
            out.add("saito", "", check_good_section(&s, &data).map_err(run_err("good section"))?);
            out.data("S", series_rows(&s.s));
        }
    }
    Ok(out)
}
