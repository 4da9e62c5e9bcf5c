//! Embedded reference datasets.

use crate::eval::GroundTruth;
use crate::graph::Graph;

/// Zachary's karate club, 1-based node IDs, 78 friendship edges.
pub const KARATE_EDGES: &str = "\
1 2\n1 3\n1 4\n1 5\n1 6\n1 7\n1 8\n1 9\n1 11\n1 12\n1 13\n1 14\n1 18\n1 20\n1 22\n1 32\n\
2 3\n2 4\n2 8\n2 14\n2 18\n2 20\n2 22\n2 31\n\
3 4\n3 8\n3 9\n3 10\n3 14\n3 28\n3 29\n3 33\n\
4 8\n4 13\n4 14\n\
5 7\n5 11\n\
6 7\n6 11\n6 17\n\
7 17\n\
9 31\n9 33\n9 34\n\
10 34\n\
14 34\n\
15 33\n15 34\n\
16 33\n16 34\n\
19 33\n19 34\n\
20 34\n\
21 33\n21 34\n\
23 33\n23 34\n\
24 26\n24 28\n24 30\n24 33\n24 34\n\
25 26\n25 28\n25 32\n\
26 32\n\
27 30\n27 34\n\
28 34\n\
29 32\n29 34\n\
30 33\n30 34\n\
31 33\n31 34\n\
32 33\n32 34\n\
33 34\n";

/// The instructor's faction after the split; everyone else followed the
/// administrator.
pub const KARATE_INSTRUCTOR_FACTION: [u32; 16] = [1, 2, 3, 4, 5, 6, 7, 8, 11, 12, 13, 14, 17, 18, 20, 22];

/// Community label of the instructor's faction.
pub const KARATE_INSTRUCTOR: &str = "w1";
/// Community label of the administrator's faction.
pub const KARATE_ADMINISTRATOR: &str = "w2";

/// Node `i` of the club has index `i - 1`.
pub fn karate_graph() -> Graph {
    let ids = (1..=34).map(|i| i.to_string()).collect();
    let edges = KARATE_EDGES.split_whitespace().collect::<Vec<_>>();
    let edges = edges.chunks(2).map(|p| {
        let a: usize = p[0].parse().expect("numeric id");
        let b: usize = p[1].parse().expect("numeric id");
        (a - 1, b - 1)
    });
    Graph::from_edges(ids, edges).expect("embedded karate data is well-formed")
}

pub fn karate_ground_truth(g: &Graph) -> GroundTruth {
    let pairs: Vec<(String, String)> = g
        .ids()
        .iter()
        .map(|id| {
            let n: u32 = id.parse().expect("karate ids are numeric");
            let label = if KARATE_INSTRUCTOR_FACTION.contains(&n) {
                KARATE_INSTRUCTOR
            } else {
                KARATE_ADMINISTRATOR
            };
            (id.clone(), label.to_string())
        })
        .collect();
    GroundTruth::from_pairs(g, &pairs).expect("ground truth covers every karate node")
}

/// Graph and ground truth for a named embedded dataset.
pub fn by_name(name: &str) -> Option<(Graph, GroundTruth)> {
    match name {
        "karate" => {
            let g = karate_graph();
            let truth = karate_ground_truth(&g);
            Some((g, truth))
        }
        _ => None,
    }
}
