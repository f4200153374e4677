mod support;

use std::collections::BTreeMap;

use confplane_core::{Config, ConfigId, ConfigKind, ControlPlane, DisseminationError, Label, LabelQuery, LabelValue};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{labels, pools};

fn load(plane: &ControlPlane, org: &str, nodes: &[pools::PoolNode]) {
    for n in nodes {
        plane.dissemination().register_node(&n.id, org, labels(&n.labels)).unwrap();
    }
}

fn selected(plane: &ControlPlane, org: &str, query: &str) -> Vec<String> {
    let q: LabelQuery = query.parse().unwrap();
    plane.dissemination().select_nodes(org, &q).unwrap().into_iter().map(|n| n.node_id).collect()
}

#[test]
fn selection_equals_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for round in 0..20 {
        let plane = ControlPlane::in_memory().unwrap();
        let nodes = pools::pool(&mut rng, 200, "");
        load(&plane, "org", &nodes);
        // a second organization with the same labels must never leak in
        load(&plane, "other", &pools::pool(&mut rng, 50, "x"));
        for _ in 0..50 {
            let q = pools::query(&mut rng);
            assert_eq!(selected(&plane, "org", &q), pools::brute_force(&nodes, &q), "round {round} query {q}");
        }
    }
}

#[test]
fn adding_a_condition_never_widens_selection() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let plane = ControlPlane::in_memory().unwrap();
    let nodes = pools::pool(&mut rng, 150, "");
    load(&plane, "org", &nodes);
    for _ in 0..200 {
        let a = pools::query(&mut rng);
        let b = format!("{a},{}", pools::query(&mut rng));
        let (wide, narrow) = (selected(&plane, "org", &a), selected(&plane, "org", &b));
        assert!(narrow.iter().all(|id| wide.contains(id)), "{b} selected outside {a}");
    }
}

fn put(plane: &ControlPlane, name: &str, version: &str, yaml: &str) -> ConfigId {
    let id = ConfigId::new("org", name, version).unwrap();
    plane.versions().put_config(&Config::from_yaml(id.clone(), ConfigKind::Standalone, yaml).unwrap(), None).unwrap();
    id
}

/// Random disseminations, relabellings and fetches checked against a model
/// that records which config versions were placed where.
#[test]
fn fetch_sees_only_own_namespace_and_placed_nodes() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let plane = ControlPlane::in_memory().unwrap();
    let mut nodes = pools::pool(&mut rng, 30, "");
    load(&plane, "org", &nodes);
    let namespaces = ["ns0", "ns1", "ns2"];
    let configs: Vec<ConfigId> =
        (0..6).map(|i| put(&plane, &format!("c{}", i % 3), &format!("{i}"), &format!("k: \"{i}\"\n"))).collect();
    let mut model: BTreeMap<(String, String), Vec<ConfigId>> = BTreeMap::new();
    for _ in 0..500 {
        match rng.random_range(0..3) {
            0 => {
                let id = &configs[rng.random_range(0..configs.len())];
                let ns = namespaces[rng.random_range(0..namespaces.len())];
                let q = pools::query(&mut rng);
                let expected = pools::brute_force(&nodes, &q);
                match plane.dissemination().disseminate(id, ConfigKind::Standalone, ns, &q.parse().unwrap()) {
                    Ok(p) => {
                        assert_eq!(p.node_ids, expected);
                        for node in expected {
                            let placed = model.entry((node, ns.to_owned())).or_default();
                            if !placed.contains(id) {
                                placed.push(id.clone());
                            }
                        }
                    }
                    Err(DisseminationError::NoMatchingNodes { .. }) => assert!(expected.is_empty()),
                    Err(e) => panic!("{e}"),
                }
            }
            1 => {
                let i = rng.random_range(0..nodes.len());
                nodes[i].labels = pools::pool(&mut rng, 1, "").remove(0).labels;
                plane.dissemination().set_labels(&nodes[i].id, labels(&nodes[i].labels)).unwrap();
            }
            _ => {
                let node = &nodes[rng.random_range(0..nodes.len())].id;
                let ns = namespaces[rng.random_range(0..namespaces.len())];
                let got: Vec<ConfigId> = plane
                    .dissemination()
                    .fetch_config(node, ns, None)
                    .unwrap()
                    .into_iter()
                    .map(|r| r.id().clone())
                    .collect();
                let want = model.get(&(node.clone(), ns.to_owned())).cloned().unwrap_or_default();
                assert_eq!(got, want, "node {node} ns {ns}");
            }
        }
    }
}

#[test]
fn placements_are_snapshots_of_the_selection() {
    let plane = ControlPlane::in_memory().unwrap();
    let d = plane.dissemination();
    d.register_node("n1", "org", vec![Label::new("zone", LabelValue::Text("eu".into()))]).unwrap();
    let id = put(&plane, "app", "1", "k: v\n");
    let placement = d.disseminate(&id, ConfigKind::Standalone, "prod", &"zone=eu".parse().unwrap()).unwrap();
    d.set_labels("n1", vec![]).unwrap();
    assert_eq!(d.placements_for("n1", "prod").unwrap(), vec![placement]);
    assert_eq!(d.fetch_config("n1", "prod", Some("app")).unwrap()[0].id(), &id);
    assert!(d.fetch_config("n1", "prod", Some("other")).unwrap().is_empty());
    assert!(d.fetch_config("n1", "dev", None).unwrap().is_empty());
    assert!(matches!(d.fetch_config("ghost", "prod", None), Err(DisseminationError::NodeNotFound(_))));
    let missing = ConfigId::new("org", "app", "2").unwrap();
    assert!(matches!(
        d.disseminate(&missing, ConfigKind::Standalone, "prod", &"zone=eu".parse().unwrap()),
        Err(DisseminationError::ConfigNotFound { .. })
    ));
    // the same version as a group does not exist
    assert!(d.disseminate(&id, ConfigKind::Group, "prod", &"zone=eu".parse().unwrap()).is_err());
}
