//! Name folding and Jaro-Winkler similarity.

/// Lowercases, trims, and strips diacritics from a name token so that all
/// comparisons run over plain ASCII letters where possible.
pub fn fold_name(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.trim().chars() {
        match fold_char(ch) {
            Folded::One(c) => out.push(c),
            Folded::Two(a, b) => {
                out.push(a);
                out.push(b);
            }
            Folded::Keep => out.extend(ch.to_lowercase()),
        }
    }
    out
}

enum Folded {
    One(char),
    Two(char, char),
    Keep,
}

// Latin-1 Supplement and Latin Extended-A coverage, enough for the name
// material in California voter files.
fn fold_char(ch: char) -> Folded {
    use Folded::*;
    match ch {
        'À'..='Å' | 'à'..='å' | 'Ā' | 'ā' | 'Ă' | 'ă' | 'Ą' | 'ą' => One('a'),
        'Ç' | 'ç' | 'Ć' | 'ć' | 'Ĉ' | 'ĉ' | 'Ċ' | 'ċ' | 'Č' | 'č' => One('c'),
        'Ð' | 'ð' | 'Ď' | 'ď' | 'Đ' | 'đ' => One('d'),
        'È'..='Ë' | 'è'..='ë' | 'Ē' | 'ē' | 'Ĕ' | 'ĕ' | 'Ė' | 'ė' | 'Ę' | 'ę' | 'Ě' | 'ě' => {
            One('e')
        }
        'Ĝ' | 'ĝ' | 'Ğ' | 'ğ' | 'Ġ' | 'ġ' | 'Ģ' | 'ģ' => One('g'),
        'Ĥ' | 'ĥ' | 'Ħ' | 'ħ' => One('h'),
        'Ì'..='Ï' | 'ì'..='ï' | 'Ĩ' | 'ĩ' | 'Ī' | 'ī' | 'Ĭ' | 'ĭ' | 'Į' | 'į' | 'İ' | 'ı' => {
            One('i')
        }
        'Ĵ' | 'ĵ' => One('j'),
        'Ķ' | 'ķ' => One('k'),
        'Ĺ' | 'ĺ' | 'Ļ' | 'ļ' | 'Ľ' | 'ľ' | 'Ŀ' | 'ŀ' | 'Ł' | 'ł' => One('l'),
        'Ñ' | 'ñ' | 'Ń' | 'ń' | 'Ņ' | 'ņ' | 'Ň' | 'ň' => One('n'),
        'Ò'..='Ö' | 'ò'..='ö' | 'Ø' | 'ø' | 'Ō' | 'ō' | 'Ŏ' | 'ŏ' | 'Ő' | 'ő' => One('o'),
        'Ŕ' | 'ŕ' | 'Ŗ' | 'ŗ' | 'Ř' | 'ř' => One('r'),
        'Ś' | 'ś' | 'Ŝ' | 'ŝ' | 'Ş' | 'ş' | 'Š' | 'š' => One('s'),
        'Ţ' | 'ţ' | 'Ť' | 'ť' | 'Ŧ' | 'ŧ' => One('t'),
        'Ù'..='Ü' | 'ù'..='ü' | 'Ũ' | 'ũ' | 'Ū' | 'ū' | 'Ŭ' | 'ŭ' | 'Ů' | 'ů' | 'Ű' | 'ű'
        | 'Ų' | 'ų' => One('u'),
        'Ŵ' | 'ŵ' => One('w'),
        'Ý' | 'ý' | 'ÿ' | 'Ŷ' | 'ŷ' | 'Ÿ' => One('y'),
        'Ź' | 'ź' | 'Ż' | 'ż' | 'Ž' | 'ž' => One('z'),
        'Æ' | 'æ' => Two('a', 'e'),
        'Œ' | 'œ' => Two('o', 'e'),
        'ß' => Two('s', 's'),
        'Þ' | 'þ' => Two('t', 'h'),
        _ => Keep,
    }
}

/// Jaro similarity over chars, with half-transposition counting.
pub fn jaro(a: &str, b: &str) -> f64 {
    let a_chars: Vec<char> = a.chars().collect();
    let b_chars: Vec<char> = b.chars().collect();
    let (a_len, b_len) = (a_chars.len(), b_chars.len());
    if a_len == 0 && b_len == 0 {
        return 1.0;
    }
    if a_len == 0 || b_len == 0 {
        return 0.0;
    }

    let window = (a_len.max(b_len) / 2).saturating_sub(1);
    let mut b_matched = vec![false; b_len];
    let mut a_matches: Vec<char> = Vec::new();
    let mut b_match_order: Vec<usize> = Vec::new();

    for (i, &ca) in a_chars.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b_len);
        for j in lo..hi {
            if !b_matched[j] && b_chars[j] == ca {
                b_matched[j] = true;
                a_matches.push(ca);
                b_match_order.push(j);
                break;
            }
        }
    }

    let m = a_matches.len();
    if m == 0 {
        return 0.0;
    }

    let mut b_sorted = b_match_order.clone();
    b_sorted.sort_unstable();
    let mut transpositions = 0.0;
    for (&ca, &j) in a_matches.iter().zip(b_sorted.iter()) {
        if b_chars[j] != ca {
            transpositions += 0.5;
        }
    }

    let m = m as f64;
    (m / a_len as f64 + m / b_len as f64 + (m - transpositions) / m) / 3.0
}

/// Jaro-Winkler with prefix scale 0.1 and prefix length capped at 4.
pub fn jaro_winkler(a: &str, b: &str) -> f64 {
    let sim = jaro(a, b);
    let prefix =
        a.chars().zip(b.chars()).take(4).take_while(|(x, y)| x == y).count() as f64;
    sim + prefix * 0.1 * (1.0 - sim)
}

/// Weighted Jaro-Winkler over a (first, last) name pair: 80% weight on the
/// last name, 20% on the first. Caller supplies folded, trimmed strings.
pub fn weighted_jw(first_a: &str, last_a: &str, first_b: &str, last_b: &str) -> f64 {
    0.8 * jaro_winkler(last_a, last_b) + 0.2 * jaro_winkler(first_a, first_b)
}
