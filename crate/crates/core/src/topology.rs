//! Village-to-gateway topology: clusters villages into connectivity sites,
//! links each site to the gateway over UHF (directly or through relays),
//! and classifies sites as exclusive access points or relay points.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;
use crate::geometry::{centroid, Point};
use crate::scenario::{Scenario, Village};

/// Slack added to radius checks so points sitting exactly on a coverage
/// circle are not lost to rounding [km].
pub const RADIUS_TOLERANCE_KM: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("radius must be positive")]
    NonpositiveRadius,
    #[error("uplink cycle detected at site index {site}")]
    CyclicUplink { site: usize },
    #[error("malformed edge list: {0}")]
    MalformedEdgeList(String),
}

/// How a site reaches the gateway.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Uplink {
    /// One hop straight to the gateway.
    Direct,
    /// Routed through another site.
    Via { relay: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteRole {
    /// Serves only its own villages.
    ExclusiveAp,
    /// Additionally forwards traffic for at least one downstream site.
    RelayPoint,
}

impl SiteRole {
    pub fn as_str(self) -> &'static str {
        match self {
            SiteRole::ExclusiveAp => "exclusive_ap",
            SiteRole::RelayPoint => "relay_point",
        }
    }
}

/// A village connectivity site: one Wi-Fi disk plus its UHF uplink.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VccSite {
    pub id: String,
    /// Disk center [km].
    pub position: Point,
    /// Covered village ids, in scenario order.
    pub served_villages: Vec<String>,
    pub role: SiteRole,
    pub uplink: Uplink,
    /// 1 = direct to the gateway.
    pub hop_count: u32,
}

/// Full radio topology for one gateway.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentPlan {
    /// Gateway location [km].
    pub ubs_position: Point,
    /// Sites in construction order; ids are `vcc-1`, `vcc-2`, ...
    pub sites: Vec<VccSite>,
    #[serde(rename = "n_A")]
    pub n_a: u64,
    #[serde(rename = "n_R")]
    pub n_r: u64,
    /// Villages whose cluster cannot reach the gateway, in scenario order.
    pub uncovered_villages: Vec<String>,
    /// Wi-Fi radius the plan was built for [km].
    pub wifi_radius_used: f64,
}

/// One Wi-Fi disk covering a set of villages.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Disk center [km].
    pub position: Point,
    /// Covered village ids, in input order.
    pub village_ids: Vec<String>,
}

/// Greedy maximum-population disk cover.
///
/// Repeatedly picks, among candidate centers (every uncovered village
/// position, then every midpoint of an uncovered pair), the disk of radius
/// `radius_km` covering the most uncovered population; ties fall to the
/// larger village count, then the lexicographically smallest covered
/// village id, then the earliest candidate. The chosen cluster is recentered
/// at the centroid of its covered villages when the centroid still covers
/// them all. Every village ends up in exactly one cluster (a singleton disk
/// always exists), so the loop terminates.
pub fn cluster_villages(
    villages: &[Village],
    radius_km: f64,
) -> Result<Vec<Cluster>, TopologyError> {
    if !(radius_km > 0.0) {
        return Err(TopologyError::NonpositiveRadius);
    }
    let mut uncovered: Vec<usize> = (0..villages.len()).collect();
    let mut clusters = Vec::new();
    while !uncovered.is_empty() {
        let mut candidates: Vec<Point> = uncovered.iter().map(|&i| villages[i].position).collect();
        for a in 0..uncovered.len() {
            for b in a + 1..uncovered.len() {
                let pa = villages[uncovered[a]].position;
                let pb = villages[uncovered[b]].position;
                candidates.push(Point { x: (pa.x + pb.x) / 2.0, y: (pa.y + pb.y) / 2.0 });
            }
        }

        let evaluate = |ci: usize| {
            let center = candidates[ci];
            let covered: Vec<usize> = uncovered
                .iter()
                .copied()
                .filter(|&v| center.distance(villages[v].position) <= radius_km + RADIUS_TOLERANCE_KM)
                .collect();
            let population: u64 = covered.iter().map(|&v| villages[v].population).sum();
            let min_id =
                covered.iter().map(|&v| villages[v].id.as_str()).min().unwrap_or("").to_string();
            (center, covered, population, min_id)
        };
        // Larger population first, then more villages, then smallest id;
        // exec resolves remaining ties by candidate order.
        let cmp = |a: &(Point, Vec<usize>, u64, String), b: &(Point, Vec<usize>, u64, String)| {
            b.2.cmp(&a.2).then(b.1.len().cmp(&a.1.len())).then(a.3.cmp(&b.3))
        };
        let (center, covered, _, _) =
            exec::min_by_index(candidates.len(), evaluate, cmp).expect("candidates are nonempty");

        let positions: Vec<Point> = covered.iter().map(|&v| villages[v].position).collect();
        let middle = centroid(&positions);
        let recentered_ok = positions
            .iter()
            .all(|p| middle.distance(*p) <= radius_km + RADIUS_TOLERANCE_KM);
        let position = if recentered_ok { middle } else { center };

        clusters.push(Cluster {
            position,
            village_ids: covered.iter().map(|&v| villages[v].id.clone()).collect(),
        });
        uncovered.retain(|v| !covered.contains(v));
    }
    Ok(clusters)
}

/// Parent link of a connected site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UplinkParent {
    Gateway,
    Site(usize),
}

/// Uplink forest over site indices.
#[derive(Debug, Clone, PartialEq)]
pub struct UplinkAssignment {
    /// `None` marks a site that never connected.
    pub parents: Vec<Option<UplinkParent>>,
    /// Hops to the gateway; meaningful only for connected sites.
    pub hops: Vec<u32>,
    /// Indices of unconnected sites, ascending.
    pub unreachable: Vec<usize>,
}

/// Connects sites to the gateway in rounds.
///
/// Sites within `uhf_radius_km` of the gateway connect directly (hop 1).
/// Each following round, every still-unconnected site attaches to the
/// nearest already-connected site in range; distance ties fall to the lower
/// hop count, then the smaller site index. Rounds repeat until no site can
/// attach; leftovers are reported unreachable, not treated as an error.
pub fn assign_uplinks(
    positions: &[Point],
    ubs: Point,
    uhf_radius_km: f64,
) -> Result<UplinkAssignment, TopologyError> {
    if !(uhf_radius_km > 0.0) {
        return Err(TopologyError::NonpositiveRadius);
    }
    let reach = uhf_radius_km + RADIUS_TOLERANCE_KM;
    let n = positions.len();
    let mut parents: Vec<Option<UplinkParent>> = vec![None; n];
    let mut hops = vec![0u32; n];
    for i in 0..n {
        if positions[i].distance(ubs) <= reach {
            parents[i] = Some(UplinkParent::Gateway);
            hops[i] = 1;
        }
    }
    loop {
        let connected: Vec<usize> = (0..n).filter(|&i| parents[i].is_some()).collect();
        let mut attached = Vec::new();
        for i in (0..n).filter(|&i| parents[i].is_none()) {
            let best = connected
                .iter()
                .copied()
                .filter(|&j| positions[i].distance(positions[j]) <= reach)
                .min_by(|&a, &b| {
                    let da = positions[i].distance(positions[a]);
                    let db = positions[i].distance(positions[b]);
                    da.total_cmp(&db).then(hops[a].cmp(&hops[b])).then(a.cmp(&b))
                });
            if let Some(j) = best {
                attached.push((i, j));
            }
        }
        if attached.is_empty() {
            break;
        }
        for (i, j) in attached {
            parents[i] = Some(UplinkParent::Site(j));
            hops[i] = hops[j] + 1;
        }
    }
    let unreachable = (0..n).filter(|&i| parents[i].is_none()).collect();
    Ok(UplinkAssignment { parents, hops, unreachable })
}

/// A site with at least one downstream child is a relay point; all others
/// are exclusive access points. Fails on a parent cycle.
pub fn classify_roles(
    parents: &[Option<UplinkParent>],
) -> Result<Vec<SiteRole>, TopologyError> {
    let n = parents.len();
    for start in 0..n {
        let mut steps = 0usize;
        let mut current = start;
        while let Some(UplinkParent::Site(next)) = parents[current] {
            steps += 1;
            if steps > n {
                return Err(TopologyError::CyclicUplink { site: start });
            }
            current = next;
        }
    }
    let mut child_count = vec![0usize; n];
    for parent in parents.iter().flatten() {
        if let UplinkParent::Site(j) = parent {
            child_count[*j] += 1;
        }
    }
    Ok(child_count
        .into_iter()
        .map(|c| if c > 0 { SiteRole::RelayPoint } else { SiteRole::ExclusiveAp })
        .collect())
}

/// Clusters, uplinks, and classifies in one pass.
///
/// Clusters that cannot reach the gateway are dropped from the site list
/// and their villages reported in `uncovered_villages`; surviving sites are
/// numbered `vcc-1..` in cluster construction order.
pub fn build_plan(scenario: &Scenario, radius_km: f64) -> Result<DeploymentPlan, TopologyError> {
    let clusters = cluster_villages(&scenario.villages, radius_km)?;
    let positions: Vec<Point> = clusters.iter().map(|c| c.position).collect();
    let assignment =
        assign_uplinks(&positions, scenario.ubs_position, scenario.radio.uhf_radius_km)?;
    let roles = classify_roles(&assignment.parents)?;

    let connected: Vec<usize> =
        (0..clusters.len()).filter(|&i| assignment.parents[i].is_some()).collect();
    let mut site_ids: Vec<Option<String>> = vec![None; clusters.len()];
    for (rank, &i) in connected.iter().enumerate() {
        site_ids[i] = Some(format!("vcc-{}", rank + 1));
    }

    let mut sites = Vec::with_capacity(connected.len());
    for &i in &connected {
        let uplink = match assignment.parents[i].expect("connected site has a parent") {
            UplinkParent::Gateway => Uplink::Direct,
            UplinkParent::Site(j) => Uplink::Via {
                relay: site_ids[j].clone().expect("parents are always connected"),
            },
        };
        sites.push(VccSite {
            id: site_ids[i].clone().expect("connected site was numbered"),
            position: clusters[i].position,
            served_villages: clusters[i].village_ids.clone(),
            role: roles[i],
            uplink,
            hop_count: assignment.hops[i],
        });
    }

    let dropped: std::collections::BTreeSet<&str> = assignment
        .unreachable
        .iter()
        .flat_map(|&i| clusters[i].village_ids.iter().map(String::as_str))
        .collect();
    let uncovered_villages = scenario
        .villages
        .iter()
        .filter(|v| dropped.contains(v.id.as_str()))
        .map(|v| v.id.clone())
        .collect();

    let n_r = sites.iter().filter(|s| s.role == SiteRole::RelayPoint).count() as u64;
    let n_a = sites.len() as u64 - n_r;
    Ok(DeploymentPlan {
        ubs_position: scenario.ubs_position,
        sites,
        n_a,
        n_r,
        uncovered_villages,
        wifi_radius_used: radius_km,
    })
}

/// Relay count forced by geography at the given Wi-Fi radius; the lower
/// bound fed to the capital-cost optimizer.
pub fn min_relay_count(scenario: &Scenario, radius_km: f64) -> Result<u64, TopologyError> {
    Ok(build_plan(scenario, radius_km)?.n_r)
}

impl DeploymentPlan {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    /// Edge list for plotting: `site_id,parent_id,distance_km,role`, one
    /// row per site in site order; direct sites have parent `ubs`.
    pub fn edge_list_csv(&self) -> String {
        let mut out = String::from("site_id,parent_id,distance_km,role\n");
        for site in &self.sites {
            let (parent_id, parent_pos) = match &site.uplink {
                Uplink::Direct => ("ubs".to_string(), self.ubs_position),
                Uplink::Via { relay } => {
                    let parent = self
                        .sites
                        .iter()
                        .find(|s| &s.id == relay)
                        .expect("uplink references an existing site");
                    (relay.clone(), parent.position)
                }
            };
            let distance = site.position.distance(parent_pos);
            out.push_str(&format!(
                "{},{},{},{}\n",
                site.id,
                parent_id,
                distance,
                site.role.as_str()
            ));
        }
        out
    }
}

/// Parses an edge list written by [`DeploymentPlan::edge_list_csv`].
pub fn parse_edge_list_csv(
    text: &str,
) -> Result<Vec<(String, String, f64, String)>, TopologyError> {
    let mut lines = text.lines();
    match lines.next() {
        Some("site_id,parent_id,distance_km,role") => {}
        other => {
            return Err(TopologyError::MalformedEdgeList(format!("bad header {other:?}")));
        }
    }
    let mut rows = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        let [site, parent, distance, role] = fields.as_slice() else {
            return Err(TopologyError::MalformedEdgeList(format!("bad row {line:?}")));
        };
        let distance: f64 = distance
            .parse()
            .map_err(|e| TopologyError::MalformedEdgeList(format!("bad distance: {e}")))?;
        rows.push((site.to_string(), parent.to_string(), distance, role.to_string()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn village(id: &str, x: f64, y: f64, population: u64) -> Village {
        Village { id: id.to_string(), position: Point { x, y }, population }
    }

    #[test]
    fn close_pair_forms_one_cluster() {
        let villages = [village("d", 9.4, 2.4, 100), village("e", 9.6, 2.6, 90)];
        let clusters = cluster_villages(&villages, 0.45).unwrap();
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].village_ids, vec!["d", "e"]);
        // Recentered at the centroid.
        assert!((clusters[0].position.x - 9.5).abs() < 1e-12);
        assert!((clusters[0].position.y - 2.5).abs() < 1e-12);
    }

    #[test]
    fn single_village_is_a_singleton_cluster() {
        let villages = [village("a", 3.0, 4.0, 120)];
        let clusters = cluster_villages(&villages, 0.45).unwrap();
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].position, Point { x: 3.0, y: 4.0 });
    }

    #[test]
    fn spread_collinear_villages_stay_singletons() {
        let villages =
            [village("a", 0.0, 0.0, 10), village("b", 1.0, 0.0, 10), village("c", 2.0, 0.0, 10)];
        let clusters = cluster_villages(&villages, 0.45).unwrap();
        assert_eq!(clusters.len(), 3);
        assert!(clusters.iter().all(|c| c.village_ids.len() == 1));
    }

    #[test]
    fn zero_radius_is_rejected() {
        assert!(cluster_villages(&[village("a", 0.0, 0.0, 1)], 0.0).is_err());
    }

    #[test]
    fn far_site_routes_through_near_site() {
        let positions = [Point { x: 9.5, y: 2.5 }, Point { x: 23.0, y: 3.0 }];
        let ubs = Point { x: 0.0, y: 0.0 };
        let assignment = assign_uplinks(&positions, ubs, 15.0).unwrap();
        assert_eq!(assignment.parents[0], Some(UplinkParent::Gateway));
        assert_eq!(assignment.hops[0], 1);
        assert_eq!(assignment.parents[1], Some(UplinkParent::Site(0)));
        assert_eq!(assignment.hops[1], 2);
        assert!(assignment.unreachable.is_empty());
    }

    #[test]
    fn all_in_range_connect_directly() {
        let positions = [Point { x: 1.0, y: 0.0 }, Point { x: 0.0, y: 2.0 }];
        let assignment = assign_uplinks(&positions, Point { x: 0.0, y: 0.0 }, 15.0).unwrap();
        assert!(assignment
            .parents
            .iter()
            .all(|p| *p == Some(UplinkParent::Gateway)));
        assert_eq!(assignment.hops, vec![1, 1]);
    }

    #[test]
    fn isolated_site_is_reported_unreachable() {
        let positions = [Point { x: 31.0, y: 0.0 }];
        let assignment = assign_uplinks(&positions, Point { x: 0.0, y: 0.0 }, 15.0).unwrap();
        assert_eq!(assignment.unreachable, vec![0]);
        assert_eq!(assignment.parents[0], None);
    }

    #[test]
    fn chain_roles_follow_child_counts() {
        use UplinkParent::*;
        let parents = vec![Some(Gateway), Some(Site(0)), Some(Site(1))];
        let roles = classify_roles(&parents).unwrap();
        assert_eq!(roles, vec![SiteRole::RelayPoint, SiteRole::RelayPoint, SiteRole::ExclusiveAp]);

        let star = vec![Some(Gateway); 4];
        assert!(classify_roles(&star).unwrap().iter().all(|r| *r == SiteRole::ExclusiveAp));
    }

    #[test]
    fn parent_cycle_is_a_structural_error() {
        use UplinkParent::*;
        let parents = vec![Some(Site(1)), Some(Site(0))];
        assert!(matches!(
            classify_roles(&parents),
            Err(TopologyError::CyclicUplink { .. })
        ));
    }

    fn scenario_with(villages: Vec<Village>) -> Scenario {
        use crate::scenario::{CostCatalog, Demographics, RadioParams};
        Scenario {
            villages,
            ubs_position: Point { x: 0.0, y: 0.0 },
            demographics: Demographics { users: 1000, density: 10.0 },
            radio: RadioParams::default(),
            costs: CostCatalog::reference(),
            energy: None,
        }
    }

    #[test]
    fn village_at_gateway_builds_trivial_plan() {
        let plan = build_plan(&scenario_with(vec![village("a", 0.0, 0.0, 50)]), 0.45).unwrap();
        assert_eq!(plan.sites.len(), 1);
        assert_eq!(plan.sites[0].uplink, Uplink::Direct);
        assert_eq!(plan.sites[0].role, SiteRole::ExclusiveAp);
        assert_eq!((plan.n_a, plan.n_r), (1, 0));
        assert!(plan.uncovered_villages.is_empty());
    }

    #[test]
    fn unreachable_village_moves_to_uncovered() {
        let plan = build_plan(&scenario_with(vec![village("far", 80.0, 0.0, 50)]), 0.45).unwrap();
        assert!(plan.sites.is_empty());
        assert_eq!((plan.n_a, plan.n_r), (0, 0));
        assert_eq!(plan.uncovered_villages, vec!["far"]);
    }

    #[test]
    fn edge_list_round_trips() {
        let villages = vec![
            village("a", 3.0, 4.0, 120),
            village("b", 22.9, 2.95, 80),
            village("d", 9.4, 2.4, 100),
            village("e", 9.6, 2.6, 90),
        ];
        let plan = build_plan(&scenario_with(villages), 0.45).unwrap();
        let csv = plan.edge_list_csv();
        let rows = parse_edge_list_csv(&csv).unwrap();
        assert_eq!(rows.len(), plan.sites.len());
        let rebuilt: String = std::iter::once("site_id,parent_id,distance_km,role\n".to_string())
            .chain(rows.iter().map(|(s, p, d, r)| format!("{s},{p},{d},{r}\n")))
            .collect();
        assert_eq!(csv, rebuilt);
    }

    #[test]
    fn widening_uhf_never_loses_sites() {
        let positions: Vec<Point> = (0..12)
            .map(|i| Point { x: 3.0 * i as f64, y: (i % 3) as f64 })
            .collect();
        let ubs = Point { x: 0.0, y: 0.0 };
        let mut previous = usize::MAX;
        for radius in [4.0, 6.0, 9.0, 14.0, 40.0] {
            let unreachable = assign_uplinks(&positions, ubs, radius).unwrap().unreachable.len();
            assert!(unreachable <= previous, "radius {radius} lost ground");
            previous = unreachable;
        }
    }
}
