//! The bundled pipeline dataset: four 12-day sharing epochs, four user
//! communities with their own short links, a handful of removed videos
//! shared by a subset of users, and a three-coder code sheet.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde_json::json;

use crate::gen::coder_bias;
use crate::rng;

pub const START: (i32, u32, u32) = (2022, 1, 1);
pub const DAYS: usize = 48;
pub const EPOCHS: usize = 4;
pub const VIDEOS_PER_EPOCH: usize = 15;
pub const REMOVED: usize = 8;
pub const USERS: usize = 120;
pub const SUSPECTS: usize = 30;
pub const COMMUNITIES: usize = 4;

pub struct Fixture {
    pub tweets_jsonl: String,
    pub videos_jsonl: String,
    pub status_json: String,
    pub codesheet_csv: String,
    pub stats_jsonl: String,
}

fn video_id(v: usize) -> String {
    format!("vid{v:08}")
}

fn removed_id(r: usize) -> String {
    format!("gone{r:07}")
}

fn date(day: usize) -> String {
    let (y, m, d) = START;
    // January then February; DAYS stays within both months
    let d0 = d as usize - 1 + day;
    if d0 < 31 {
        format!("{y}-{m:02}-{:02}", d0 + 1)
    } else {
        format!("{y}-{:02}-{:02}", m + 1, d0 - 31 + 1)
    }
}

fn expanded(r: &mut impl Rng, id: &str) -> String {
    match r.random_range(0..4) {
        0 => format!("https://www.youtube.com/watch?v={id}"),
        1 => format!("https://youtu.be/{id}"),
        2 => format!("https://m.youtube.com/watch?feature=share&v={id}"),
        _ => format!("https://www.youtube.com/shorts/{id}"),
    }
}

struct Writer {
    lines: Vec<String>,
    next_id: u64,
}

impl Writer {
    fn tweet(&mut self, r: &mut impl Rng, user: usize, day: usize, urls: Vec<(String, String)>) {
        let secs = r.random_range(0..86_400);
        let text = if urls.is_empty() {
            "no link here"
        } else {
            "worth watching"
        };
        let line = json!({
            "id": self.next_id.to_string(),
            "user_id": format!("user{user:04}"),
            "created_at": format!("{}T{:02}:{:02}:{:02}Z", date(day), secs / 3600, secs / 60 % 60, secs % 60),
            "retweet": r.random_bool(0.3),
            "text": text,
            "urls": urls.into_iter().map(|(s, e)| json!({"short": s, "expanded": e})).collect::<Vec<_>>(),
        });
        self.lines.push(line.to_string());
        self.next_id += 1;
    }
}

fn short_link(community: usize, id: &str, path: usize) -> String {
    format!("https://t.co/c{community}{id}p{path}")
}

pub fn pipeline_fixture(seed: u64) -> Fixture {
    let mut r = rng(seed);
    let mut w = Writer {
        lines: Vec::new(),
        next_id: 1_000_000,
    };
    let n_videos = EPOCHS * VIDEOS_PER_EPOCH;
    let unknown: Vec<usize> = vec![3, 22, 41, 58];
    let users_in = |c: usize| (0..USERS).filter(move |u| u % COMMUNITIES == c).collect::<Vec<_>>();

    for day in 0..DAYS {
        let epoch = day * EPOCHS / DAYS;
        for v in epoch * VIDEOS_PER_EPOCH..(epoch + 1) * VIDEOS_PER_EPOCH {
            if !r.random_bool(0.5) {
                continue;
            }
            let community = (v * 7 + day / 6) % COMMUNITIES;
            for _ in 0..r.random_range(1..=3) {
                let c = if r.random_bool(0.85) {
                    community
                } else {
                    r.random_range(0..COMMUNITIES)
                };
                let user = *users_in(c).choose(&mut r).expect("community has users");
                let id = video_id(v);
                let mut urls = vec![(short_link(c, &id, r.random_range(0..2)), expanded(&mut r, &id))];
                if r.random_bool(0.1) {
                    let other = epoch * VIDEOS_PER_EPOCH + r.random_range(0..VIDEOS_PER_EPOCH);
                    if other != v {
                        let oid = video_id(other);
                        urls.push((short_link(c, &oid, 0), expanded(&mut r, &oid)));
                    }
                }
                w.tweet(&mut r, user, day, urls);
            }
        }
        // removed videos are shared by the first SUSPECTS users only
        if day % 3 == 0 {
            let user = r.random_range(0..SUSPECTS);
            let id = removed_id(r.random_range(0..REMOVED));
            let mut urls = vec![(short_link(user % COMMUNITIES, &id, 0), expanded(&mut r, &id))];
            if r.random_bool(0.3) {
                let vid = video_id(epoch * VIDEOS_PER_EPOCH + r.random_range(0..VIDEOS_PER_EPOCH));
                urls.push((short_link(user % COMMUNITIES, &vid, 1), expanded(&mut r, &vid)));
            }
            w.tweet(&mut r, user, day, urls);
        }
        let user = r.random_range(0..USERS);
        w.tweet(
            &mut r,
            user,
            day,
            vec![(
                format!("https://t.co/x{day}"),
                format!("https://example.com/post/{day}"),
            )],
        );
    }
    // make sure every suspect shared at least one removed video
    for user in 0..SUSPECTS {
        let id = removed_id(user % REMOVED);
        let urls = vec![(short_link(user % COMMUNITIES, &id, 1), expanded(&mut r, &id))];
        w.tweet(&mut r, user, user % DAYS, urls);
    }

    let checked = "2022-06-01T00:00:00Z";
    let mut videos = Vec::new();
    let mut status = serde_json::Map::new();
    for v in 0..n_videos {
        let s = if unknown.contains(&v) { "unknown" } else { "available" };
        videos.push(
            json!({"video_id": video_id(v), "status": s, "title": format!("Video number {v}"),
                   "channel": format!("Channel {}", v % 7), "checked_at": checked})
            .to_string(),
        );
        status.insert(video_id(v), json!(true));
    }
    for rm in 0..REMOVED {
        videos.push(json!({"video_id": removed_id(rm), "status": "unavailable", "checked_at": checked}).to_string());
        status.insert(removed_id(rm), json!(false));
    }

    let sim = coder_bias(seed ^ 0x5eed, n_videos, 3, 2, 0.3);
    let mut sheet = vec!["video_id,coder_id,v,p,n,q,cx,coded_at".to_string()];
    let bit = |b: bool| if b { "1" } else { "0" };
    for v in 0..n_videos {
        let epoch = v / VIDEOS_PER_EPOCH;
        // coders take alternating epochs
        let c = (epoch % 3) as u32 + 1;
        let mut codes = sim.truth[v];
        if c == 2 && r.random_bool(0.3) {
            codes[3] = true;
        }
        sheet.push(format!(
            "{},{c},{},{},{},{},{},2022-06-{:02}T{:02}:00:00Z",
            video_id(v),
            bit(codes[0]),
            bit(codes[1]),
            bit(codes[2]),
            bit(codes[3]),
            bit(codes[4]),
            2 + epoch,
            v % 24
        ));
    }

    Fixture {
        tweets_jsonl: join_lines(&w.lines),
        videos_jsonl: join_lines(&videos),
        status_json: serde_json::to_string_pretty(&status).expect("serializable") + "\n",
        codesheet_csv: join_lines(&sheet),
        stats_jsonl: stats_fixture(seed),
    }
}

/// Ten days of mixed traffic for daily link statistics, including a day
/// without tweets and a day without video links.
fn stats_fixture(seed: u64) -> String {
    let mut r = rng(seed.wrapping_add(17));
    let mut w = Writer {
        lines: Vec::new(),
        next_id: 5_000_000,
    };
    for day in 0..10 {
        if day == 4 {
            continue;
        }
        for _ in 0..r.random_range(2..7) {
            let user = r.random_range(0..USERS);
            let mut urls = Vec::new();
            if day != 7 {
                for _ in 0..r.random_range(0..3) {
                    let id = if r.random_bool(0.25) {
                        removed_id(r.random_range(0..REMOVED))
                    } else {
                        video_id(r.random_range(0..EPOCHS * VIDEOS_PER_EPOCH))
                    };
                    urls.push((short_link(0, &id, 0), expanded(&mut r, &id)));
                }
            }
            if r.random_bool(0.3) {
                urls.push(("https://t.co/other".into(), "https://example.com/a".into()));
            }
            w.tweet(&mut r, user, day, urls);
        }
    }
    join_lines(&w.lines)
}

fn join_lines(lines: &[String]) -> String {
    let mut s = lines.join("\n");
    s.push('\n');
    s
}
