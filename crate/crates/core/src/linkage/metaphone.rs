//! Classic Metaphone phonetic codes (not Double Metaphone), with the
//! standard four-character code cap. Behavior is pinned to the widely used
//! commons-codec implementation by the golden vectors in the tests.

const FRONT_VOWELS: &str = "EIY";
// H is silent after these.
const VARSON: &str = "CSPTG";
const MAX_CODE_LEN: usize = 4;

fn is_vowel(c: u8) -> bool {
    matches!(c, b'A' | b'E' | b'I' | b'O' | b'U')
}

fn is_front_vowel(c: u8) -> bool {
    FRONT_VOWELS.as_bytes().contains(&c)
}

fn region_match(word: &[u8], n: usize, test: &str) -> bool {
    word.len() >= n + test.len() && &word[n..n + test.len()] == test.as_bytes()
}

/// Phonetic code for a single name token. Input is folded to ASCII letters
/// first; an empty or letter-free token yields an empty code.
pub fn metaphone(token: &str) -> String {
    let word: Vec<u8> = super::similarity::fold_name(token)
        .bytes()
        .filter(|b| b.is_ascii_alphabetic())
        .map(|b| b.to_ascii_uppercase())
        .collect();

    if word.is_empty() {
        return String::new();
    }
    if word.len() == 1 {
        return String::from_utf8(word).unwrap();
    }

    // Initial-pair exceptions.
    let local: Vec<u8> = match (word[0], word[1]) {
        (b'K' | b'G' | b'P', b'N') | (b'A', b'E') | (b'W', b'R') => word[1..].to_vec(),
        (b'W', b'H') => {
            let mut v = word[1..].to_vec();
            v[0] = b'W';
            v
        }
        (b'X', _) => {
            let mut v = word.clone();
            v[0] = b'S';
            v
        }
        _ => word.clone(),
    };
    let wdsz = local.len();
    let is_last = |n: usize| n + 1 == wdsz;

    let mut code: Vec<u8> = Vec::with_capacity(MAX_CODE_LEN + 1);
    let mut n = 0;
    while code.len() < MAX_CODE_LEN && n < wdsz {
        let symb = local[n];
        // Collapse duplicate letters, except C.
        if symb != b'C' && n > 0 && local[n - 1] == symb {
            n += 1;
            continue;
        }
        match symb {
            b'A' | b'E' | b'I' | b'O' | b'U' => {
                if n == 0 {
                    code.push(symb);
                }
            }
            b'B' => {
                // Silent terminal B after M (lamb, comb).
                if !(n > 0 && local[n - 1] == b'M' && is_last(n)) {
                    code.push(b'B');
                }
            }
            b'C' => {
                if n > 0 && local[n - 1] == b'S' && !is_last(n) && is_front_vowel(local[n + 1]) {
                    // SCE/SCI/SCY: C discarded.
                } else if region_match(&local, n, "CIA") {
                    code.push(b'X');
                } else if !is_last(n) && is_front_vowel(local[n + 1]) {
                    code.push(b'S');
                } else if n > 0 && local[n - 1] == b'S' && n + 1 < wdsz && local[n + 1] == b'H' {
                    code.push(b'K'); // SCH
                } else if n + 1 < wdsz && local[n + 1] == b'H' {
                    if n == 0 && wdsz >= 3 && is_vowel(local[2]) {
                        code.push(b'K');
                    } else {
                        code.push(b'X');
                    }
                } else {
                    code.push(b'K');
                }
            }
            b'D' => {
                if n + 2 < wdsz && local[n + 1] == b'G' && is_front_vowel(local[n + 2]) {
                    code.push(b'J'); // DGE/DGI/DGY
                    n += 2;
                } else {
                    code.push(b'T');
                }
            }
            b'G' => {
                let gh_terminal = n + 2 == wdsz && local[n + 1] == b'H';
                let gh_before_consonant =
                    n + 2 < wdsz && local[n + 1] == b'H' && !is_vowel(local[n + 2]);
                let silent_gn = n > 0
                    && (region_match(&local, n, "GN") || region_match(&local, n, "GNED"));
                if gh_terminal || gh_before_consonant || silent_gn {
                    // silent
                } else if !is_last(n) && is_front_vowel(local[n + 1]) {
                    code.push(b'J');
                } else {
                    code.push(b'K');
                }
            }
            b'H' => {
                let silent = is_last(n)
                    || (n > 0 && VARSON.as_bytes().contains(&local[n - 1]))
                    || !is_vowel(local[n + 1]);
                if !silent {
                    code.push(b'H');
                }
            }
            b'F' | b'J' | b'L' | b'M' | b'N' | b'R' => code.push(symb),
            b'K' => {
                if n == 0 || local[n - 1] != b'C' {
                    code.push(b'K');
                }
            }
            b'P' => {
                if n + 1 < wdsz && local[n + 1] == b'H' {
                    code.push(b'F');
                } else {
                    code.push(b'P');
                }
            }
            b'Q' => code.push(b'K'),
            b'S' => {
                if region_match(&local, n, "SH")
                    || region_match(&local, n, "SIO")
                    || region_match(&local, n, "SIA")
                {
                    code.push(b'X');
                } else {
                    code.push(b'S');
                }
            }
            b'T' => {
                if region_match(&local, n, "TIA") || region_match(&local, n, "TIO") {
                    code.push(b'X');
                } else if region_match(&local, n, "TCH") {
                    // silent
                } else if region_match(&local, n, "TH") {
                    code.push(b'0');
                } else {
                    code.push(b'T');
                }
            }
            b'V' => code.push(b'F'),
            b'W' | b'Y' => {
                if !is_last(n) && is_vowel(local[n + 1]) {
                    code.push(symb);
                }
            }
            b'X' => {
                code.push(b'K');
                code.push(b'S');
            }
            b'Z' => code.push(b'S'),
            _ => {}
        }
        n += 1;
        code.truncate(MAX_CODE_LEN);
    }
    String::from_utf8(code).unwrap()
}

/// Phonetic equality: both codes nonempty and equal.
pub fn metaphone_match(a: &str, b: &str) -> bool {
    let ca = metaphone(a);
    !ca.is_empty() && ca == metaphone(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_sentence_vectors() {
        // Golden vectors from the commons-codec test suite.
        for (word, code) in [
            ("howl", "HL"),
            ("testing", "TSTNK"),
            ("The", "0"),
            ("quick", "KK"),
            ("brown", "BRN"),
            ("fox", "FKS"),
            ("jumped", "JMPT"),
            ("over", "OFR"),
            ("lazy", "LS"),
            ("dogs", "TKS"),
        ] {
            let expected = &code[..code.len().min(MAX_CODE_LEN)];
            assert_eq!(metaphone(word), expected, "metaphone({word})");
        }
    }

    #[test]
    fn reference_rule_vectors() {
        for (word, code) in [
            ("SCHEDULE", "SKTL"),
            ("SCHEMATIC", "SKMT"),
            ("CHARACTER", "KRKT"),
            ("TEACH", "TX"),
            ("SCIENCE", "SNS"),
            ("SCENE", "SN"),
            ("COMB", "KM"),
            ("TOMB", "TM"),
            ("WOMB", "WM"),
            ("KNIGHT", "NT"),
            ("NIGHT", "NT"),
            ("WRIGHT", "RT"),
            ("WHY", ""),
            ("AARDVARK", "ARTF"),
            ("DODGE", "TJ"),
            ("PHISH", "FX"),
            ("XAVIER", "SFR"),
        ] {
            assert_eq!(metaphone(word), code, "metaphone({word})");
        }
    }

    #[test]
    fn canonical_name_pairs_agree() {
        assert_eq!(metaphone("Smith"), metaphone("Smyth"));
        assert_eq!(metaphone("Katherine"), metaphone("Catherine"));
        assert_eq!(metaphone("Katherine"), "K0RN");
        assert!(metaphone_match("Stephen", "Steven"));
        assert!(!metaphone_match("Garcia", "Nguyen"));
    }

    #[test]
    fn empty_and_single() {
        assert_eq!(metaphone(""), "");
        assert_eq!(metaphone("-"), "");
        assert_eq!(metaphone("I"), "I");
        assert!(!metaphone_match("", ""));
    }

    #[test]
    fn folds_before_coding() {
        assert_eq!(metaphone("José"), metaphone("Jose"));
        assert_eq!(metaphone("O'Brien"), metaphone("OBrien"));
    }
}
