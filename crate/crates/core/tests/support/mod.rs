#![allow(dead_code)]

pub mod gate_corpus;
pub mod gen;
pub mod pools;

use confplane_core::dissemination::{Label, LabelValue};
use confplane_core::model::GroupSets;
use confplane_core::ParamSet;

pub fn param_set(p: &gen::Params) -> ParamSet {
    p.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
}

pub fn group_sets(s: &gen::Sets) -> GroupSets {
    s.iter().map(|(name, p)| (name.clone(), param_set(p))).collect()
}

pub fn labels(l: &pools::Labels) -> Vec<Label> {
    l.iter()
        .map(|(k, v)| {
            let value = match v {
                pools::Value::Bool(b) => LabelValue::Bool(*b),
                pools::Value::Num(x) => LabelValue::Number(*x),
                pools::Value::Text(s) => LabelValue::Text(s.clone()),
            };
            Label::new(k.clone(), value)
        })
        .collect()
}
