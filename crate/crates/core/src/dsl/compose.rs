use std::collections::{BTreeMap, BTreeSet};

use super::op::{EditProgram, ParamDecl};

/// Stack `second` on top of `first`.
///
/// Parameters of `second` whose names are taken get the first free suffix
/// `_2`, `_3`, ...
pub fn compose(first: &EditProgram, second: &EditProgram) -> EditProgram {
    let mut taken: BTreeSet<String> = first.param_names();
    taken.extend(second.param_names());
    let mut renames: BTreeMap<String, String> = BTreeMap::new();
    let mut params = first.params.clone();
    for p in &second.params {
        let name = if first.param(&p.name).is_some() {
            let fresh = (2..).map(|k| format!("{}_{k}", p.name)).find(|n| !taken.contains(n)).expect("unbounded");
            taken.insert(fresh.clone());
            renames.insert(p.name.clone(), fresh.clone());
            fresh
        } else {
            p.name.clone()
        };
        params.push(ParamDecl { name, ..p.clone() });
    }
    let mut ops = first.ops.clone();
    ops.extend(second.ops.iter().map(|op| {
        if renames.is_empty() {
            op.clone()
        } else {
            op.with_amount(op.amount.rename(&renames))
        }
    }));
    EditProgram { params, ops }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    #[test]
    fn colliding_names_get_suffixes() {
        let a = parse("param x [0, 1]\nparam x_2 [0, 2]\nop translate a x + x_2 {dir=1,0,0}\n").unwrap();
        let b = parse("param x [0, 3]\nop translate b 2 * x {dir=0,1,0}\n").unwrap();
        let c = compose(&a, &b);
        let names: Vec<&str> = c.params.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, ["x", "x_2", "x_3"]);
        assert_eq!(c.params[2].hi, 3.0);
        assert_eq!(c.ops[1].amount.to_string(), "2 * x_3");
    }

    #[test]
    fn identity_is_neutral() {
        let a = parse("param x [0, 1]\nop translate a x {dir=1,0,0}\n").unwrap();
        assert_eq!(compose(&a, &EditProgram::default()), a);
        assert_eq!(compose(&EditProgram::default(), &a), a);
    }
}
