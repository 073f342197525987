//! Pharaoh `i-j` word alignments (zero-based).

use super::PromptError;

pub fn parse_pharaoh(line: &str) -> Result<Vec<(usize, usize)>, PromptError> {
    line.split_whitespace()
        .map(|tok| {
            let (s, t) = tok.split_once('-').ok_or_else(|| PromptError::AlignmentSyntax(tok.to_string()))?;
            let parse = |x: &str| x.parse::<usize>().map_err(|_| PromptError::AlignmentSyntax(tok.to_string()));
            Ok((parse(s)?, parse(t)?))
        })
        .collect()
}

pub fn format_pharaoh(pairs: impl IntoIterator<Item = (usize, usize)>) -> String {
    pairs.into_iter().map(|(s, t)| format!("{s}-{t}")).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs() {
        assert_eq!(parse_pharaoh("0-0 1-2  2-1\n").unwrap(), vec![(0, 0), (1, 2), (2, 1)]);
        assert_eq!(parse_pharaoh("").unwrap(), vec![]);
    }

    #[test]
    fn rejects_bad_tokens() {
        for bad in ["0", "0-", "a-1", "1-2-3", "-1-0"] {
            assert!(parse_pharaoh(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn format_round_trips() {
        let pairs = vec![(0, 1), (3, 2)];
        assert_eq!(parse_pharaoh(&format_pharaoh(pairs.clone())).unwrap(), pairs);
    }
}
