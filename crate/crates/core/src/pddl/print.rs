use std::fmt::Write;

use super::*;

fn typed(params: &[(impl AsRef<str>, impl AsRef<str>)]) -> String {
    params
        .iter()
        .map(|(n, t)| format!("{} - {}", n.as_ref(), t.as_ref()))
        .collect::<Vec<_>>()
        .join(" ")
}

fn params(ps: &[TypedParam]) -> String {
    typed(
        &ps.iter()
            .map(|p| (p.name.as_str(), p.ty.as_str()))
            .collect::<Vec<_>>(),
    )
}

fn atom_schema(a: &AtomSchema) -> String {
    atom_name(
        &a.predicate,
        &a.args.iter().map(Term::text).collect::<Vec<_>>(),
    )
}

fn condition(c: &Condition) -> String {
    let (positive, body) = match c {
        Condition::Atom { positive, atom } => (*positive, atom_schema(atom)),
        Condition::Equal {
            positive,
            left,
            right,
        } => (*positive, format!("(= {} {})", left.text(), right.text())),
    };
    if positive {
        body
    } else {
        format!("(not {body})")
    }
}

pub fn print_domain(d: &DomainDef) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "(define (domain {})", d.name);
    if !d.requirements.is_empty() {
        let _ = writeln!(s, "  (:requirements {})", d.requirements.join(" "));
    }
    if !d.types.declared.is_empty() {
        let _ = writeln!(s, "  (:types {})", typed(&d.types.declared));
    }
    if !d.constants.is_empty() {
        let _ = writeln!(s, "  (:constants {})", typed(&d.constants));
    }
    let _ = writeln!(s, "  (:predicates");
    for p in &d.predicates {
        if p.params.is_empty() {
            let _ = writeln!(s, "    ({})", p.name);
        } else {
            let _ = writeln!(s, "    ({} {})", p.name, params(&p.params));
        }
    }
    let _ = writeln!(s, "  )");
    for a in &d.actions {
        let _ = writeln!(s, "  (:action {}", a.name);
        let _ = writeln!(s, "    :parameters ({})", params(&a.params));
        let pre: Vec<String> = a.precondition.iter().map(condition).collect();
        let _ = writeln!(s, "    :precondition (and {})", pre.join(" "));
        let eff: Vec<String> = a
            .add
            .iter()
            .map(atom_schema)
            .chain(a.delete.iter().map(|x| format!("(not {})", atom_schema(x))))
            .collect();
        let _ = writeln!(s, "    :effect (and {}))", eff.join(" "));
    }
    s.push_str(")\n");
    s
}

pub fn print_problem(p: &ProblemDef) -> String {
    let lit = |l: &GroundLiteral| {
        if l.positive {
            l.atom_name()
        } else {
            format!("(not {})", l.atom_name())
        }
    };
    let mut s = String::new();
    let _ = writeln!(s, "(define (problem {})", p.name);
    let _ = writeln!(s, "  (:domain {})", p.domain_name);
    let _ = writeln!(s, "  (:objects {})", typed(&p.objects));
    let _ = writeln!(s, "  (:init");
    for l in &p.init {
        let _ = writeln!(s, "    {}", lit(l));
    }
    let _ = writeln!(s, "  )");
    let goals: Vec<String> = p.goal.iter().map(lit).collect();
    let _ = writeln!(s, "  (:goal (and {})))", goals.join(" "));
    s
}
