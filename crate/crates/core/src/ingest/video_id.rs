use std::collections::HashSet;

use url::Url;

const ID_LEN: usize = 11;

fn is_id_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

/// True if `id` is an 11-character string over `[A-Za-z0-9_-]`.
pub fn is_valid_video_id(id: &str) -> bool {
    id.len() == ID_LEN && id.chars().all(is_id_char)
}

/// Take a leading 11-character id from a path segment, rejecting longer runs.
fn leading_id(segment: &str) -> Option<String> {
    let head: String = segment.chars().take_while(|&c| is_id_char(c)).collect();
    is_valid_video_id(&head).then_some(head)
}

fn is_youtube_host(host: &str) -> bool {
    let host = host.trim_start_matches("www.").trim_start_matches("m.");
    matches!(
        host,
        "youtube.com" | "music.youtube.com" | "youtube-nocookie.com"
    )
}

/// Extract the video id from one URL, if it points at a video.
///
/// Recognised forms are `youtube.com/watch?v=`, `youtu.be/`, `/embed/`,
/// `/shorts/`, `/live/` and `/v/`.
pub fn extract_video_id(raw: &str) -> Option<String> {
    let url = Url::parse(raw.trim()).ok()?;
    let host = url.host_str()?.to_ascii_lowercase();
    let mut segments = url.path_segments()?.filter(|s| !s.is_empty());

    if host == "youtu.be" || host == "www.youtu.be" {
        return segments.next().and_then(leading_id);
    }
    if !is_youtube_host(&host) {
        return None;
    }
    match segments.next()? {
        "watch" => url
            .query_pairs()
            .find(|(k, _)| k == "v")
            .and_then(|(_, v)| leading_id(&v)),
        "embed" | "shorts" | "live" | "v" => segments.next().and_then(leading_id),
        _ => None,
    }
}

/// Distinct video ids referenced by `urls`, in first-seen order.
pub fn extract_video_ids<'a>(urls: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut seen = HashSet::new();
    urls.into_iter()
        .filter_map(extract_video_id)
        .filter(|id| seen.insert(id.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn watch_form() {
        assert_eq!(
            extract_video_ids(["https://www.youtube.com/watch?v=AbCdEfGhIjK"]),
            vec!["AbCdEfGhIjK"]
        );
    }

    #[test]
    fn short_form_with_timestamp_and_foreign_url() {
        assert_eq!(
            extract_video_ids(["https://youtu.be/AbCdEfGhIjK?t=33", "https://example.com/x"]),
            vec!["AbCdEfGhIjK"]
        );
    }

    #[test]
    fn duplicates_collapse() {
        assert_eq!(
            extract_video_ids([
                "https://youtu.be/AbCdEfGhIjK",
                "https://www.youtube.com/watch?v=AbCdEfGhIjK",
            ]),
            vec!["AbCdEfGhIjK"]
        );
    }

    #[test]
    fn embed_shorts_and_order() {
        let ids = extract_video_ids([
            "https://www.youtube.com/shorts/s_ortVideo1",
            "https://youtube.com/embed/EmbEdVideo-?autoplay=1",
            "https://m.youtube.com/watch?feature=share&v=MobileVid01",
        ]);
        assert_eq!(ids, vec!["s_ortVideo1", "EmbEdVideo-", "MobileVid01"]);
    }

    #[test]
    fn rejects_non_video_urls() {
        for u in [
            "https://www.youtube.com/channel/UCabcdefghijk",
            "https://www.youtube.com/watch?v=short",
            "https://www.youtube.com/watch?v=AbCdEfGhIjKL",
            "https://notyoutube.com/watch?v=AbCdEfGhIjK",
            "not a url",
            "",
        ] {
            assert_eq!(extract_video_id(u), None, "{u}");
        }
    }

    proptest! {
        #[test]
        fn query_order_does_not_matter(
            id in "[A-Za-z0-9_-]{11}",
            extra in prop::collection::vec(("[a-z]{1,5}", "[a-z0-9]{0,6}"), 0..4),
            pos in 0usize..5,
        ) {
            let mut pairs: Vec<String> = extra
                .iter()
                .filter(|(k, _)| k != "v")
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            let canonical = format!("https://www.youtube.com/watch?v={id}&{}", pairs.join("&"));
            pairs.insert(pos.min(pairs.len()), format!("v={id}"));
            let shuffled = format!("https://www.youtube.com/watch?{}", pairs.join("&"));
            prop_assert_eq!(extract_video_id(&canonical), Some(id.clone()));
            prop_assert_eq!(extract_video_id(&shuffled), Some(id));
        }
    }
}
