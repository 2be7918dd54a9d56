//! Porter (1980) suffix-stripping stemmer, original rule set.
//!
//! Only lowercase ASCII words longer than two letters are stemmed; anything
//! else is returned unchanged.

struct Word {
    b: Vec<u8>,
}

impl Word {
    fn is_consonant(&self, i: usize) -> bool {
        match self.b[i] {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => i == 0 || !self.is_consonant(i - 1),
            _ => true,
        }
    }

    /// Measure `m` of `b[..len]`: the number of VC sequences in `[C](VC)^m[V]`.
    fn measure(&self, len: usize) -> usize {
        let mut m = 0;
        let mut i = 0;
        while i < len && self.is_consonant(i) {
            i += 1;
        }
        loop {
            while i < len && !self.is_consonant(i) {
                i += 1;
            }
            if i >= len {
                return m;
            }
            while i < len && self.is_consonant(i) {
                i += 1;
            }
            m += 1;
            if i >= len {
                return m;
            }
        }
    }

    fn has_vowel(&self, len: usize) -> bool {
        (0..len).any(|i| !self.is_consonant(i))
    }

    /// `*d`: ends in a double consonant.
    fn ends_double_consonant(&self, len: usize) -> bool {
        len >= 2 && self.b[len - 1] == self.b[len - 2] && self.is_consonant(len - 1)
    }

    /// `*o`: ends consonant-vowel-consonant, last not w, x or y.
    fn ends_cvc(&self, len: usize) -> bool {
        len >= 3
            && self.is_consonant(len - 3)
            && !self.is_consonant(len - 2)
            && self.is_consonant(len - 1)
            && !matches!(self.b[len - 1], b'w' | b'x' | b'y')
    }

    fn ends_with(&self, suffix: &str) -> bool {
        self.b.ends_with(suffix.as_bytes())
    }

    fn stem_len(&self, suffix: &str) -> usize {
        self.b.len() - suffix.len()
    }

    fn replace(&mut self, suffix: &str, with: &str) {
        let keep = self.stem_len(suffix);
        self.b.truncate(keep);
        self.b.extend_from_slice(with.as_bytes());
    }

    /// Applies the rule whose suffix is the longest match; a failed condition
    /// ends the step.
    fn apply_longest(&mut self, rules: &[(&str, &str)], cond: impl Fn(&Word, usize) -> bool) -> bool {
        let hit = rules
            .iter()
            .filter(|(s, _)| self.ends_with(s))
            .max_by_key(|(s, _)| s.len());
        match hit {
            Some((suffix, with)) if cond(self, self.stem_len(suffix)) => {
                self.replace(suffix, with);
                true
            }
            _ => false,
        }
    }

    fn step1a(&mut self) {
        self.apply_longest(
            &[("sses", "ss"), ("ies", "i"), ("ss", "ss"), ("s", "")],
            |_, _| true,
        );
    }

    fn step1b(&mut self) {
        if self.ends_with("eed") {
            if self.measure(self.stem_len("eed")) > 0 {
                self.replace("eed", "ee");
            }
            return;
        }
        let stripped = ["ed", "ing"].into_iter().find(|s| {
            self.ends_with(s) && self.has_vowel(self.stem_len(s))
        });
        let Some(suffix) = stripped else { return };
        self.replace(suffix, "");
        if self.ends_with("at") || self.ends_with("bl") || self.ends_with("iz") {
            self.b.push(b'e');
        } else if self.ends_double_consonant(self.b.len())
            && !matches!(self.b[self.b.len() - 1], b'l' | b's' | b'z')
        {
            self.b.pop();
        } else if self.measure(self.b.len()) == 1 && self.ends_cvc(self.b.len()) {
            self.b.push(b'e');
        }
    }

    fn step1c(&mut self) {
        if self.ends_with("y") && self.has_vowel(self.b.len() - 1) {
            let n = self.b.len();
            self.b[n - 1] = b'i';
        }
    }

    fn step2(&mut self) {
        const RULES: &[(&str, &str)] = &[
            ("ational", "ate"),
            ("tional", "tion"),
            ("enci", "ence"),
            ("anci", "ance"),
            ("izer", "ize"),
            ("abli", "able"),
            ("alli", "al"),
            ("entli", "ent"),
            ("eli", "e"),
            ("ousli", "ous"),
            ("ization", "ize"),
            ("ation", "ate"),
            ("ator", "ate"),
            ("alism", "al"),
            ("iveness", "ive"),
            ("fulness", "ful"),
            ("ousness", "ous"),
            ("aliti", "al"),
            ("iviti", "ive"),
            ("biliti", "ble"),
        ];
        self.apply_longest(RULES, |w, len| w.measure(len) > 0);
    }

    fn step3(&mut self) {
        const RULES: &[(&str, &str)] = &[
            ("icate", "ic"),
            ("ative", ""),
            ("alize", "al"),
            ("iciti", "ic"),
            ("ical", "ic"),
            ("ful", ""),
            ("ness", ""),
        ];
        self.apply_longest(RULES, |w, len| w.measure(len) > 0);
    }

    fn step4(&mut self) {
        const RULES: &[(&str, &str)] = &[
            ("al", ""),
            ("ance", ""),
            ("ence", ""),
            ("er", ""),
            ("ic", ""),
            ("able", ""),
            ("ible", ""),
            ("ant", ""),
            ("ement", ""),
            ("ment", ""),
            ("ent", ""),
            ("ion", ""),
            ("ou", ""),
            ("ism", ""),
            ("ate", ""),
            ("iti", ""),
            ("ous", ""),
            ("ive", ""),
            ("ize", ""),
        ];
        self.apply_longest(RULES, |w, len| {
            if w.measure(len) <= 1 {
                return false;
            }
            // "ion" additionally needs the stem to end in s or t.
            if w.ends_with("ion") && len == w.stem_len("ion") {
                return len > 0 && matches!(w.b[len - 1], b's' | b't');
            }
            true
        });
    }

    fn step5a(&mut self) {
        if self.ends_with("e") {
            let len = self.b.len() - 1;
            let m = self.measure(len);
            if m > 1 || (m == 1 && !self.ends_cvc(len)) {
                self.b.pop();
            }
        }
    }

    fn step5b(&mut self) {
        let n = self.b.len();
        if self.measure(n) > 1 && self.ends_double_consonant(n) && self.b[n - 1] == b'l' {
            self.b.pop();
        }
    }
}

pub fn porter_stem(word: &str) -> String {
    if word.len() <= 2 || !word.bytes().all(|c| c.is_ascii_lowercase()) {
        return word.to_string();
    }
    let mut w = Word {
        b: word.as_bytes().to_vec(),
    };
    w.step1a();
    w.step1b();
    w.step1c();
    w.step2();
    w.step3();
    w.step4();
    w.step5a();
    w.step5b();
    String::from_utf8(w.b).expect("ascii in, ascii out")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(word: &str, f: fn(&mut Word)) -> String {
        let mut w = Word {
            b: word.as_bytes().to_vec(),
        };
        f(&mut w);
        String::from_utf8(w.b).unwrap()
    }

    fn check(f: fn(&mut Word), cases: &[(&str, &str)]) {
        for (input, want) in cases {
            assert_eq!(step(input, f), *want, "{input}");
        }
    }

    #[test]
    fn measure_examples() {
        let m = |s: &str| {
            let w = Word {
                b: s.as_bytes().to_vec(),
            };
            w.measure(s.len())
        };
        for s in ["tr", "ee", "tree", "y", "by"] {
            assert_eq!(m(s), 0, "{s}");
        }
        for s in ["trouble", "oats", "trees", "ivy"] {
            assert_eq!(m(s), 1, "{s}");
        }
        for s in ["troubles", "private", "oaten", "orrery"] {
            assert_eq!(m(s), 2, "{s}");
        }
    }

    #[test]
    fn step1_examples() {
        check(
            Word::step1a,
            &[
                ("caresses", "caress"),
                ("ponies", "poni"),
                ("ties", "ti"),
                ("caress", "caress"),
                ("cats", "cat"),
            ],
        );
        check(
            Word::step1b,
            &[
                ("feed", "feed"),
                ("agreed", "agree"),
                ("plastered", "plaster"),
                ("bled", "bled"),
                ("motoring", "motor"),
                ("sing", "sing"),
                ("conflated", "conflate"),
                ("troubled", "trouble"),
                ("sized", "size"),
                ("hopping", "hop"),
                ("tanned", "tan"),
                ("falling", "fall"),
                ("hissing", "hiss"),
                ("fizzed", "fizz"),
                ("failing", "fail"),
                ("filing", "file"),
            ],
        );
        check(Word::step1c, &[("happy", "happi"), ("sky", "sky")]);
    }

    #[test]
    fn step2_examples() {
        check(
            Word::step2,
            &[
                ("relational", "relate"),
                ("conditional", "condition"),
                ("rational", "rational"),
                ("valenci", "valence"),
                ("hesitanci", "hesitance"),
                ("digitizer", "digitize"),
                ("conformabli", "conformable"),
                ("radicalli", "radical"),
                ("differentli", "different"),
                ("vileli", "vile"),
                ("analogousli", "analogous"),
                ("vietnamization", "vietnamize"),
                ("predication", "predicate"),
                ("operator", "operate"),
                ("feudalism", "feudal"),
                ("decisiveness", "decisive"),
                ("hopefulness", "hopeful"),
                ("callousness", "callous"),
                ("formaliti", "formal"),
                ("sensitiviti", "sensitive"),
                ("sensibiliti", "sensible"),
            ],
        );
    }

    #[test]
    fn step3_examples() {
        check(
            Word::step3,
            &[
                ("triplicate", "triplic"),
                ("formative", "form"),
                ("formalize", "formal"),
                ("electriciti", "electric"),
                ("electrical", "electric"),
                ("hopeful", "hope"),
                ("goodness", "good"),
            ],
        );
    }

    #[test]
    fn step4_examples() {
        check(
            Word::step4,
            &[
                ("revival", "reviv"),
                ("allowance", "allow"),
                ("inference", "infer"),
                ("airliner", "airlin"),
                ("gyroscopic", "gyroscop"),
                ("adjustable", "adjust"),
                ("defensible", "defens"),
                ("irritant", "irrit"),
                ("replacement", "replac"),
                ("adjustment", "adjust"),
                ("dependent", "depend"),
                ("adoption", "adopt"),
                ("homologou", "homolog"),
                ("communism", "commun"),
                ("activate", "activ"),
                ("angulariti", "angular"),
                ("homologous", "homolog"),
                ("effective", "effect"),
                ("bowdlerize", "bowdler"),
            ],
        );
    }

    #[test]
    fn step5_examples() {
        check(
            Word::step5a,
            &[("probate", "probat"), ("rate", "rate"), ("cease", "ceas")],
        );
        check(Word::step5b, &[("controll", "control"), ("roll", "roll")]);
    }

    #[test]
    fn full_stems() {
        for (input, want) in [
            ("caresses", "caress"),
            ("flies", "fli"),
            ("mules", "mule"),
            ("denied", "deni"),
            ("agreed", "agre"),
            ("owned", "own"),
            ("humbled", "humbl"),
            ("sized", "size"),
            ("meeting", "meet"),
            ("stating", "state"),
            ("siezing", "siez"),
            ("itemization", "item"),
            ("sensational", "sensat"),
            ("traditional", "tradit"),
            ("reference", "refer"),
            ("colonizer", "colon"),
            ("plotted", "plot"),
            ("generalizations", "gener"),
            ("oscillators", "oscil"),
            ("relational", "relat"),
        ] {
            assert_eq!(porter_stem(input), want, "{input}");
        }
    }

    #[test]
    fn leaves_short_and_non_alpha_tokens() {
        assert_eq!(porter_stem("is"), "is");
        assert_eq!(porter_stem("."), ".");
        assert_eq!(porter_stem("v1"), "v1");
        assert_eq!(porter_stem("Rhythm"), "Rhythm");
    }
}
