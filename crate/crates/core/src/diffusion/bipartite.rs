use std::collections::HashMap;

use crate::ingest::{extract_video_id, TweetRecord};

/// Users connected to the short links they shared. A link is the shortened
/// URL as posted, so each identifies one sharing path to one video.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BipartiteGraph {
    /// Sorted user ids.
    pub users: Vec<String>,
    /// Sorted link strings.
    pub links: Vec<String>,
    /// Video each link resolves to, aligned with `links`.
    pub link_video: Vec<String>,
    /// Distinct `(user index, link index)` pairs, sorted.
    pub edges: Vec<(usize, usize)>,
}

impl BipartiteGraph {
    /// Links of each user, as adjacency lists aligned with `users`.
    pub fn user_links(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.users.len()];
        for &(u, l) in &self.edges {
            adj[u].push(l);
        }
        adj
    }

    /// Number of distinct users per link.
    pub fn link_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.links.len()];
        for &(_, l) in &self.edges {
            d[l] += 1;
        }
        d
    }
}

/// Build the user-link graph from the video URLs in `tweets`.
///
/// Repeated shares of a link by one user collapse to a single edge. A link
/// seen resolving to different videos keeps the first and logs a warning.
pub fn build_bipartite(tweets: &[TweetRecord]) -> BipartiteGraph {
    let mut link_video: HashMap<String, String> = HashMap::new();
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut ordered: Vec<&TweetRecord> = tweets.iter().collect();
    ordered.sort_by(|a, b| (a.timestamp, &a.tweet_id).cmp(&(b.timestamp, &b.tweet_id)));
    for t in ordered {
        for u in &t.urls {
            let Some(video) = extract_video_id(&u.expanded).or_else(|| extract_video_id(&u.short)) else {
                continue;
            };
            let link = if u.short.trim().is_empty() { &u.expanded } else { &u.short };
            let link = link.trim().to_string();
            match link_video.get(&link) {
                Some(existing) if *existing != video => {
                    log::warn!("link {link} resolves to {existing} and {video}; keeping {existing}");
                }
                Some(_) => {}
                None => {
                    link_video.insert(link.clone(), video);
                }
            }
            pairs.push((t.user_id.clone(), link));
        }
    }

    let mut users: Vec<String> = pairs.iter().map(|(u, _)| u.clone()).collect();
    users.sort();
    users.dedup();
    let mut links: Vec<String> = link_video.keys().cloned().collect();
    links.sort();
    let user_ix: HashMap<&str, usize> = users.iter().enumerate().map(|(i, u)| (u.as_str(), i)).collect();
    let link_ix: HashMap<&str, usize> = links.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut edges: Vec<(usize, usize)> = pairs
        .iter()
        .map(|(u, l)| (user_ix[u.as_str()], link_ix[l.as_str()]))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    let link_video = links.iter().map(|l| link_video[l].clone()).collect();
    BipartiteGraph {
        users,
        links,
        link_video,
        edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::UrlEntity;
    use chrono::{TimeZone, Utc};

    fn tweet(id: u32, user: &str, short: &str, video: &str) -> TweetRecord {
        TweetRecord::new(
            format!("{id}"),
            user,
            Utc.with_ymd_and_hms(2022, 1, 1, 0, 0, id).unwrap(),
            false,
            "",
            vec![UrlEntity {
                short: short.into(),
                expanded: format!("https://www.youtube.com/watch?v={video}"),
            }],
        )
    }

    #[test]
    fn dedups_pairs_and_keeps_first_video() {
        let tweets = vec![
            tweet(1, "u1", "https://t.co/a", "AAAAAAAAAAA"),
            tweet(2, "u1", "https://t.co/a", "AAAAAAAAAAA"),
            tweet(3, "u2", "https://t.co/a", "BBBBBBBBBBB"),
            tweet(4, "u2", "https://t.co/b", "BBBBBBBBBBB"),
        ];
        let g = build_bipartite(&tweets);
        assert_eq!(g.users, vec!["u1", "u2"]);
        assert_eq!(g.links, vec!["https://t.co/a", "https://t.co/b"]);
        assert_eq!(g.link_video, vec!["AAAAAAAAAAA", "BBBBBBBBBBB"]);
        assert_eq!(g.edges, vec![(0, 0), (1, 0), (1, 1)]);
        assert_eq!(g.link_degrees(), vec![2, 1]);
    }

    #[test]
    fn non_video_urls_are_ignored() {
        let mut t = tweet(1, "u1", "https://t.co/a", "AAAAAAAAAAA");
        t.urls[0].expanded = "https://example.com/x".into();
        assert!(build_bipartite(&[t]).links.is_empty());
    }
}
