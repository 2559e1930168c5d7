//! Rule-based sentence splitting for webpage summaries.

/// Tokens ending in a period that do not close a sentence.
pub const ABBREVIATIONS: &[&str] = &[
    "approx.", "avg.", "bn.", "co.", "corp.", "dr.", "e.g.", "e.u.", "est.", "etc.", "fig.",
    "i.e.", "inc.", "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.", "sep.", "sept.",
    "oct.", "nov.", "dec.", "jr.", "ltd.", "mio.", "mln.", "mr.", "mrs.", "ms.", "no.", "st.",
    "u.k.", "u.n.", "u.s.", "u.s.a.", "vs.",
];

fn guarded(token: &str) -> bool {
    let lower = token
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    // single initials such as "J."
    let mut chars = lower.chars();
    matches!((chars.next(), chars.next(), chars.next()), (Some(c), Some('.'), None) if c.is_alphabetic())
}

/// Splits at `.`, `!` or `?` followed by whitespace and a capital letter,
/// unless the period ends a known abbreviation. Whitespace inside a sentence
/// is collapsed to single spaces.
pub fn split_sentences(summary: &str) -> Vec<String> {
    let text = summary.split_whitespace().collect::<Vec<_>>().join(" ");
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0;
    for (i, &(pos, c)) in chars.iter().enumerate() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let (Some(&(_, space)), Some(&(_, next))) = (chars.get(i + 1), chars.get(i + 2)) else {
            continue;
        };
        if space != ' ' || !next.is_uppercase() {
            continue;
        }
        let end = pos + c.len_utf8();
        if c == '.' {
            let token_start = text[..pos].rfind(' ').map(|s| s + 1).unwrap_or(0);
            if guarded(&text[token_start..end]) {
                continue;
            }
        }
        let sentence = text[start..end].trim();
        if !sentence.is_empty() {
            out.push(sentence.to_string());
        }
        start = end;
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail.to_string());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_split() {
        assert_eq!(split_sentences("A grew. B fell."), ["A grew.", "B fell."]);
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("   \n ").is_empty());
    }

    #[test]
    fn abbreviations_do_not_split() {
        assert_eq!(split_sentences("In the U.S. sales rose."), ["In the U.S. sales rose."]);
        assert_eq!(
            split_sentences("Sales in the U.S. Market rose. Approx. Ten firms left."),
            ["Sales in the U.S. Market rose.", "Approx. Ten firms left."]
        );
        assert_eq!(split_sentences("Dr. Smith wrote it. J. Doe agreed!"), ["Dr. Smith wrote it.", "J. Doe agreed!"]);
    }

    #[test]
    fn decimals_and_questions() {
        assert_eq!(
            split_sentences("It reached 81.2 in 2022. Why? Demand rose."),
            ["It reached 81.2 in 2022.", "Why?", "Demand rose."]
        );
        assert_eq!(split_sentences("Lower case. after stop."), ["Lower case. after stop."]);
        assert_eq!(split_sentences("Spread\nover\n\nlines.  Next one."), ["Spread over lines.", "Next one."]);
    }

    proptest! {
        #[test]
        fn sentences_cover_the_words(text in "[A-Za-z0-9 .!?\n]{0,80}") {
            let sentences = split_sentences(&text);
            prop_assert!(sentences.iter().all(|s| !s.is_empty() && s.trim() == s));
            let joined = sentences.join(" ");
            let normalized = text.split_whitespace().collect::<Vec<_>>().join(" ");
            prop_assert_eq!(joined, normalized);
        }
    }
}
