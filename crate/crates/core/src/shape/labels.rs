//! Directional phrases for parts sharing a label.

use std::collections::BTreeMap;

use super::PartNode;

/// Axis order of words inside a phrase, with the words for the low and high
/// side of each axis.
const AXES: [(usize, &str, &str); 3] = [(1, "bottom", "top"), (2, "front", "back"), (0, "left", "right")];

/// Give every part whose label is shared a phrase such as "front left".
///
/// Each axis on which the group's centroids spread by more than `tol` splits
/// the group at the mean; parts within `tol` of the mean get no word for that
/// axis. Parts with unique labels keep `None`.
pub fn assign_directional_phrases(nodes: &mut [PartNode], tol: f64) {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, n) in nodes.iter().enumerate() {
        groups.entry(n.label.clone()).or_default().push(i);
    }
    for members in groups.values() {
        if members.len() < 2 {
            for &i in members {
                nodes[i].phrase = None;
            }
            continue;
        }
        let mut words: Vec<Vec<&str>> = vec![Vec::new(); members.len()];
        for (axis, low, high) in AXES {
            let vals: Vec<f64> = members.iter().map(|&i| nodes[i].centroid()[axis]).collect();
            let (min, max) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
            if max - min <= tol {
                continue;
            }
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            for (k, v) in vals.iter().enumerate() {
                if *v < mean - tol {
                    words[k].push(low);
                } else if *v > mean + tol {
                    words[k].push(high);
                }
            }
        }
        for (k, &i) in members.iter().enumerate() {
            nodes[i].phrase = (!words[k].is_empty()).then(|| words[k].join(" "));
        }
    }
}
