use std::collections::{BTreeMap, HashSet};

use super::sexpr::{self, Pos, Sexpr};
use super::*;

fn syntax(pos: Pos, msg: impl Into<String>) -> PddlError {
    PddlError::Syntax {
        line: pos.line,
        col: pos.col,
        msg: msg.into(),
    }
}

fn list<'a>(e: &'a Sexpr, what: &str) -> Result<&'a [Sexpr], PddlError> {
    e.as_list()
        .ok_or_else(|| syntax(e.pos(), format!("expected list for {what}")))
}

fn atom<'a>(e: &'a Sexpr, what: &str) -> Result<&'a str, PddlError> {
    e.as_atom()
        .ok_or_else(|| syntax(e.pos(), format!("expected {what}")))
}

/// `a b - t c - u d` → [(a,t),(b,t),(c,u),(d,object)]
fn typed_list(items: &[Sexpr]) -> Result<Vec<(String, String, Pos)>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let name = atom(&items[i], "name")?;
        if name == "-" {
            let ty_expr = items
                .get(i + 1)
                .ok_or_else(|| syntax(items[i].pos(), "missing type after '-'"))?;
            if ty_expr.head() == Some("either") {
                return Err(syntax(ty_expr.pos(), "either-types are not supported"));
            }
            let ty = atom(ty_expr, "type name")?;
            if pending.is_empty() {
                return Err(syntax(items[i].pos(), "'-' without preceding names"));
            }
            for (n, p) in pending.drain(..) {
                out.push((n, ty.to_string(), p));
            }
            i += 2;
        } else {
            pending.push((name.to_string(), items[i].pos()));
            i += 1;
        }
    }
    for (n, p) in pending {
        out.push((n, OBJECT.to_string(), p));
    }
    Ok(out)
}

pub fn parse_domain(text: &str) -> Result<DomainDef, PddlError> {
    let top = sexpr::parse(text)?;
    let items = list(&top, "domain")?;
    if items.first().and_then(Sexpr::as_atom) != Some("define") {
        return Err(syntax(top.pos(), "expected (define ...)"));
    }
    let header = items
        .get(1)
        .ok_or_else(|| syntax(top.pos(), "missing domain header"))?;
    let h = list(header, "domain header")?;
    if h.len() != 2 || h[0].as_atom() != Some("domain") {
        return Err(syntax(header.pos(), "expected (domain <name>)"));
    }
    let mut domain = DomainDef {
        name: atom(&h[1], "domain name")?.to_string(),
        requirements: Vec::new(),
        types: TypeHierarchy::default(),
        constants: Vec::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
    };
    let mut action_exprs = Vec::new();
    let mut type_pos: BTreeMap<String, Pos> = BTreeMap::new();
    for section in &items[2..] {
        let sec = list(section, "domain section")?;
        let key = sec
            .first()
            .and_then(Sexpr::as_atom)
            .ok_or_else(|| syntax(section.pos(), "empty section"))?;
        match key {
            ":requirements" => {
                for r in &sec[1..] {
                    let name = atom(r, "requirement")?;
                    if !SUPPORTED_REQUIREMENTS.contains(&name) {
                        let p = r.pos();
                        return Err(PddlError::UnsupportedRequirement {
                            line: p.line,
                            col: p.col,
                            name: name.into(),
                        });
                    }
                    domain.requirements.push(name.to_string());
                }
            }
            ":types" => {
                for (name, parent, pos) in typed_list(&sec[1..])? {
                    if name == OBJECT {
                        continue;
                    }
                    if domain.types.declared.iter().any(|(n, _)| *n == name) {
                        return Err(PddlError::Duplicate {
                            line: pos.line,
                            col: pos.col,
                            name,
                        });
                    }
                    type_pos.insert(name.clone(), pos);
                    domain.types.declared.push((name, parent));
                }
            }
            ":constants" => {
                for (name, ty, pos) in typed_list(&sec[1..])? {
                    type_pos.entry(ty.clone()).or_insert(pos);
                    domain.constants.push((name, ty));
                }
            }
            ":predicates" => {
                for p in &sec[1..] {
                    let pl = list(p, "predicate")?;
                    let name = atom(
                        pl.first()
                            .ok_or_else(|| syntax(p.pos(), "empty predicate"))?,
                        "predicate name",
                    )?;
                    if domain.predicates.iter().any(|q| q.name == name) {
                        return Err(PddlError::Duplicate {
                            line: p.pos().line,
                            col: p.pos().col,
                            name: name.into(),
                        });
                    }
                    let params = typed_list(&pl[1..])?
                        .into_iter()
                        .map(|(n, ty, pos)| {
                            type_pos.entry(ty.clone()).or_insert(pos);
                            TypedParam { name: n, ty }
                        })
                        .collect();
                    domain.predicates.push(PredicateDef {
                        name: name.to_string(),
                        params,
                    });
                }
            }
            ":action" => action_exprs.push(section),
            ":functions" | ":derived" | ":durative-action" | ":constraints" => {
                return Err(syntax(section.pos(), format!("{key} is not supported")));
            }
            other => {
                return Err(syntax(
                    section.pos(),
                    format!("unknown domain section {other}"),
                ))
            }
        }
    }
    // Parents used only on the right of '-' are implicitly subtypes of object.
    let parents: Vec<String> = domain
        .types
        .declared
        .iter()
        .map(|(_, p)| p.clone())
        .collect();
    for parent in parents {
        if !domain.types.contains(&parent) {
            domain.types.declared.push((parent, OBJECT.to_string()));
        }
    }
    domain.types.check_acyclic()?;
    for (ty, pos) in &type_pos {
        if !domain.types.contains(ty) {
            return Err(PddlError::UnknownType {
                line: pos.line,
                col: pos.col,
                name: ty.clone(),
            });
        }
    }
    for a in action_exprs {
        let schema = parse_action(a, &domain)?;
        if domain.actions.iter().any(|x| x.name == schema.name) {
            return Err(PddlError::Duplicate {
                line: a.pos().line,
                col: a.pos().col,
                name: schema.name,
            });
        }
        domain.actions.push(schema);
    }
    Ok(domain)
}

struct Scope<'a> {
    domain: &'a DomainDef,
    vars: BTreeMap<String, String>,
}

impl Scope<'_> {
    fn term(&self, e: &Sexpr) -> Result<(Term, String), PddlError> {
        let s = atom(e, "term")?;
        let p = e.pos();
        if s.starts_with('?') {
            let ty = self
                .vars
                .get(s)
                .ok_or_else(|| PddlError::UndefinedVariable {
                    line: p.line,
                    col: p.col,
                    name: s.into(),
                })?;
            Ok((Term::Var(s.to_string()), ty.clone()))
        } else {
            let ty = self
                .domain
                .constants
                .iter()
                .find(|(c, _)| c == s)
                .map(|(_, t)| t.clone())
                .ok_or_else(|| PddlError::UnknownObject {
                    line: p.line,
                    col: p.col,
                    name: s.into(),
                })?;
            Ok((Term::Const(s.to_string()), ty))
        }
    }

    fn atom(&self, e: &Sexpr) -> Result<AtomSchema, PddlError> {
        let items = list(e, "atom")?;
        let head = items.first().ok_or_else(|| syntax(e.pos(), "empty atom"))?;
        let name = atom(head, "predicate name")?;
        let p = head.pos();
        let pred = self
            .domain
            .predicate(name)
            .ok_or_else(|| PddlError::UndefinedPredicate {
                line: p.line,
                col: p.col,
                name: name.into(),
            })?;
        if pred.arity() != items.len() - 1 {
            return Err(PddlError::ArityMismatch {
                line: p.line,
                col: p.col,
                name: name.into(),
                expected: pred.arity(),
                got: items.len() - 1,
            });
        }
        let mut args = Vec::new();
        for (arg, param) in items[1..].iter().zip(&pred.params) {
            let (term, ty) = self.term(arg)?;
            let h = &self.domain.types;
            if !h.is_subtype(&ty, &param.ty) && !h.is_subtype(&param.ty, &ty) {
                let ap = arg.pos();
                return Err(PddlError::TypeMismatch {
                    line: ap.line,
                    col: ap.col,
                    name: name.into(),
                    arg: term.text().to_string(),
                });
            }
            args.push(term);
        }
        Ok(AtomSchema {
            predicate: name.to_string(),
            args,
        })
    }

    fn conditions(&self, e: &Sexpr, out: &mut Vec<Condition>) -> Result<(), PddlError> {
        match e.head() {
            Some("and") => {
                for c in &e.as_list().unwrap()[1..] {
                    self.conditions(c, out)?;
                }
            }
            Some("not") => {
                let items = e.as_list().unwrap();
                if items.len() != 2 {
                    return Err(syntax(e.pos(), "not takes one argument"));
                }
                match self.literal(&items[1])? {
                    Condition::Atom { atom, .. } => out.push(Condition::Atom {
                        positive: false,
                        atom,
                    }),
                    Condition::Equal { left, right, .. } => out.push(Condition::Equal {
                        positive: false,
                        left,
                        right,
                    }),
                }
            }
            Some("or" | "imply" | "exists" | "forall" | "when") => {
                return Err(syntax(
                    e.pos(),
                    format!("{} is not supported", e.head().unwrap()),
                ));
            }
            _ => out.push(self.literal(e)?),
        }
        Ok(())
    }

    fn literal(&self, e: &Sexpr) -> Result<Condition, PddlError> {
        if e.head() == Some("=") {
            let items = e.as_list().unwrap();
            if items.len() != 3 {
                return Err(syntax(e.pos(), "= takes two arguments"));
            }
            if !self.domain.requirements.iter().any(|r| r == ":equality") {
                return Err(syntax(e.pos(), "= requires :equality"));
            }
            let (l, _) = self.term(&items[1])?;
            let (r, _) = self.term(&items[2])?;
            return Ok(Condition::Equal {
                positive: true,
                left: l,
                right: r,
            });
        }
        Ok(Condition::Atom {
            positive: true,
            atom: self.atom(e)?,
        })
    }

    fn effects(
        &self,
        e: &Sexpr,
        add: &mut Vec<AtomSchema>,
        del: &mut Vec<AtomSchema>,
    ) -> Result<(), PddlError> {
        match e.head() {
            Some("and") => {
                for c in &e.as_list().unwrap()[1..] {
                    self.effects(c, add, del)?;
                }
            }
            Some("not") => {
                let items = e.as_list().unwrap();
                if items.len() != 2 {
                    return Err(syntax(e.pos(), "not takes one argument"));
                }
                del.push(self.atom(&items[1])?);
            }
            Some("forall" | "when" | "increase" | "decrease" | "assign") => {
                return Err(syntax(
                    e.pos(),
                    format!("{} effects are not supported", e.head().unwrap()),
                ));
            }
            _ => add.push(self.atom(e)?),
        }
        Ok(())
    }
}

fn parse_action(e: &Sexpr, domain: &DomainDef) -> Result<ActionSchema, PddlError> {
    let items = e.as_list().unwrap();
    let name = atom(
        items
            .get(1)
            .ok_or_else(|| syntax(e.pos(), "missing action name"))?,
        "action name",
    )?;
    let mut params = Vec::new();
    let mut pre_expr = None;
    let mut eff_expr = None;
    let mut i = 2;
    while i < items.len() {
        let key = atom(&items[i], "action keyword")?;
        let val = items
            .get(i + 1)
            .ok_or_else(|| syntax(items[i].pos(), format!("missing value for {key}")))?;
        match key {
            ":parameters" => {
                for (n, ty, pos) in typed_list(list(val, "parameters")?)? {
                    if !n.starts_with('?') {
                        return Err(syntax(pos, "parameters must start with '?'"));
                    }
                    if !domain.types.contains(&ty) {
                        return Err(PddlError::UnknownType {
                            line: pos.line,
                            col: pos.col,
                            name: ty,
                        });
                    }
                    params.push(TypedParam { name: n, ty });
                }
            }
            ":precondition" => pre_expr = Some(val),
            ":effect" => eff_expr = Some(val),
            other => {
                return Err(syntax(
                    items[i].pos(),
                    format!("unknown action keyword {other}"),
                ))
            }
        }
        i += 2;
    }
    let mut seen = HashSet::new();
    for p in &params {
        if !seen.insert(p.name.clone()) {
            return Err(PddlError::Duplicate {
                line: e.pos().line,
                col: e.pos().col,
                name: p.name.clone(),
            });
        }
    }
    let scope = Scope {
        domain,
        vars: params
            .iter()
            .map(|p| (p.name.clone(), p.ty.clone()))
            .collect(),
    };
    let mut precondition = Vec::new();
    if let Some(p) = pre_expr {
        if p.as_list().is_some_and(|l| !l.is_empty()) {
            scope.conditions(p, &mut precondition)?;
        }
    }
    let (mut add, mut delete) = (Vec::new(), Vec::new());
    if let Some(x) = eff_expr {
        if x.as_list().is_some_and(|l| !l.is_empty()) {
            scope.effects(x, &mut add, &mut delete)?;
        }
    }
    let negative = precondition.iter().any(|c| {
        matches!(
            c,
            Condition::Atom {
                positive: false,
                ..
            }
        )
    });
    if negative
        && !domain
            .requirements
            .iter()
            .any(|r| r == ":negative-preconditions")
    {
        return Err(syntax(
            e.pos(),
            "negative precondition requires :negative-preconditions",
        ));
    }
    Ok(ActionSchema {
        name: name.to_string(),
        params,
        precondition,
        add,
        delete,
    })
}

fn ground_literal(
    e: &Sexpr,
    domain: &DomainDef,
    objects: &BTreeMap<String, String>,
    allow_negative: bool,
) -> Result<GroundLiteral, PddlError> {
    if e.head() == Some("not") {
        let items = e.as_list().unwrap();
        if !allow_negative || items.len() != 2 {
            return Err(syntax(e.pos(), "negated literal not allowed here"));
        }
        let mut lit = ground_literal(&items[1], domain, objects, false)?;
        lit.positive = false;
        return Ok(lit);
    }
    let items = list(e, "ground atom")?;
    let head = items.first().ok_or_else(|| syntax(e.pos(), "empty atom"))?;
    let name = atom(head, "predicate")?;
    let hp = head.pos();
    let pred = domain
        .predicate(name)
        .ok_or_else(|| PddlError::UndefinedPredicate {
            line: hp.line,
            col: hp.col,
            name: name.into(),
        })?;
    if pred.arity() != items.len() - 1 {
        return Err(PddlError::ArityMismatch {
            line: hp.line,
            col: hp.col,
            name: name.into(),
            expected: pred.arity(),
            got: items.len() - 1,
        });
    }
    let mut args = Vec::new();
    for (a, param) in items[1..].iter().zip(&pred.params) {
        let o = atom(a, "object")?;
        let ap = a.pos();
        let ty = objects.get(o).ok_or_else(|| PddlError::UnknownObject {
            line: ap.line,
            col: ap.col,
            name: o.into(),
        })?;
        if !domain.types.is_subtype(ty, &param.ty) {
            return Err(PddlError::TypeMismatch {
                line: ap.line,
                col: ap.col,
                name: name.into(),
                arg: o.into(),
            });
        }
        args.push(o.to_string());
    }
    Ok(GroundLiteral {
        positive: true,
        predicate: name.to_string(),
        args,
    })
}

fn goal_literals(
    e: &Sexpr,
    domain: &DomainDef,
    objects: &BTreeMap<String, String>,
    out: &mut Vec<GroundLiteral>,
) -> Result<(), PddlError> {
    if e.head() == Some("and") {
        for c in &e.as_list().unwrap()[1..] {
            goal_literals(c, domain, objects, out)?;
        }
        return Ok(());
    }
    if e.as_list().is_some_and(|l| l.is_empty()) {
        return Ok(());
    }
    if let Some(h @ ("or" | "imply" | "exists" | "forall")) = e.head() {
        return Err(syntax(e.pos(), format!("{h} goals are not supported")));
    }
    out.push(ground_literal(e, domain, objects, true)?);
    Ok(())
}

pub fn parse_problem(text: &str, domain: &DomainDef) -> Result<ProblemDef, PddlError> {
    let top = sexpr::parse(text)?;
    let items = list(&top, "problem")?;
    if items.first().and_then(Sexpr::as_atom) != Some("define") {
        return Err(syntax(top.pos(), "expected (define ...)"));
    }
    let header = items
        .get(1)
        .ok_or_else(|| syntax(top.pos(), "missing problem header"))?;
    let h = list(header, "problem header")?;
    if h.len() != 2 || h[0].as_atom() != Some("problem") {
        return Err(syntax(header.pos(), "expected (problem <name>)"));
    }
    let mut problem = ProblemDef {
        name: atom(&h[1], "problem name")?.to_string(),
        domain_name: String::new(),
        objects: Vec::new(),
        init: Vec::new(),
        goal: Vec::new(),
    };
    let mut init_expr = None;
    let mut goal_expr = None;
    for section in &items[2..] {
        let sec = list(section, "problem section")?;
        let key = sec
            .first()
            .and_then(Sexpr::as_atom)
            .ok_or_else(|| syntax(section.pos(), "empty section"))?;
        match key {
            ":domain" => {
                let d = atom(
                    sec.get(1)
                        .ok_or_else(|| syntax(section.pos(), "missing domain name"))?,
                    "domain name",
                )?;
                problem.domain_name = d.to_string();
            }
            ":requirements" => {
                for r in &sec[1..] {
                    let name = atom(r, "requirement")?;
                    if !SUPPORTED_REQUIREMENTS.contains(&name) {
                        let p = r.pos();
                        return Err(PddlError::UnsupportedRequirement {
                            line: p.line,
                            col: p.col,
                            name: name.into(),
                        });
                    }
                }
            }
            ":objects" => {
                for (name, ty, pos) in typed_list(&sec[1..])? {
                    if !domain.types.contains(&ty) {
                        return Err(PddlError::UnknownType {
                            line: pos.line,
                            col: pos.col,
                            name: ty,
                        });
                    }
                    if problem.objects.iter().any(|(o, _)| *o == name)
                        || domain.constants.iter().any(|(o, _)| *o == name)
                    {
                        return Err(PddlError::Duplicate {
                            line: pos.line,
                            col: pos.col,
                            name,
                        });
                    }
                    problem.objects.push((name, ty));
                }
            }
            ":init" => init_expr = Some(&sec[1..]),
            ":goal" => {
                if sec.len() != 2 {
                    return Err(syntax(section.pos(), ":goal takes one formula"));
                }
                goal_expr = Some(&sec[1]);
            }
            ":metric" => return Err(syntax(section.pos(), ":metric is not supported")),
            other => {
                return Err(syntax(
                    section.pos(),
                    format!("unknown problem section {other}"),
                ))
            }
        }
    }
    if problem.domain_name != domain.name {
        return Err(PddlError::DomainMismatch {
            domain: domain.name.clone(),
            problem: problem.domain_name.clone(),
        });
    }
    let objects = object_types(domain, &problem);
    if let Some(init) = init_expr {
        for e in init {
            let lit = ground_literal(e, domain, &objects, false)?;
            if !problem.init.contains(&lit) {
                problem.init.push(lit);
            }
        }
    }
    if let Some(g) = goal_expr {
        goal_literals(g, domain, &objects, &mut problem.goal)?;
    }
    Ok(problem)
}
