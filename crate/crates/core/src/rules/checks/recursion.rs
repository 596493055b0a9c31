use crate::flow::{recursion_components, CallGraph};
use crate::rules::{Certainty, Raw};
use crate::sema::Program;

pub(crate) fn check_r17_2(program: &Program, cg: &CallGraph) -> Vec<Raw> {
    let mut out = Vec::new();
    for comp in recursion_components(cg) {
        let mut names: Vec<&str> = comp.iter().map(|g| program.global(*g).name.as_str()).collect();
        names.sort_unstable();
        let cycle = names.join(", ");
        for &m in &comp {
            let g = program.global(m);
            let Some((_, span)) = &g.definition else { continue };
            let message = if comp.len() == 1 {
                format!("function `{}` calls itself", g.name)
            } else {
                format!("function `{}` is part of a recursive call cycle", g.name)
            };
            let mut raw = Raw::new("R17.2", span, Certainty::Definite, message)
                .note(None, format!("functions in the cycle: {cycle}"));
            for call in cg.direct_calls.iter().filter(|c| c.caller == m) {
                let Some(callee) = call.callee.filter(|c| comp.contains(c)) else {
                    continue;
                };
                raw = raw.note(
                    Some(&call.span),
                    format!("`{}` calls `{}`", g.name, program.global(callee).name),
                );
            }
            out.push(raw);
        }
    }
    for site in &cg.indirect_call_sites {
        out.push(
            Raw::new(
                "R17.2",
                &site.span,
                Certainty::Caution,
                "call through a function pointer may be recursive",
            )
            .note(None, "the callee of an indirect call is not resolved"),
        );
    }
    out
}
