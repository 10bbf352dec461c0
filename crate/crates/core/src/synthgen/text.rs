use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SynthError;

const EN_WORDS: &[&str] = &[
    "the",
    "of",
    "and",
    "to",
    "in",
    "that",
    "it",
    "was",
    "for",
    "with",
    "his",
    "they",
    "which",
    "have",
    "from",
    "this",
    "by",
    "had",
    "not",
    "but",
    "what",
    "all",
    "were",
    "when",
    "we",
    "there",
    "can",
    "an",
    "your",
    "their",
    "said",
    "each",
    "she",
    "would",
    "how",
    "other",
    "about",
    "many",
    "then",
    "them",
    "these",
    "some",
    "her",
    "make",
    "like",
    "him",
    "into",
    "time",
    "has",
    "look",
    "two",
    "more",
    "write",
    "see",
    "number",
    "way",
    "could",
    "people",
    "than",
    "first",
    "water",
    "been",
    "call",
    "who",
    "oil",
    "now",
    "find",
    "long",
    "down",
    "day",
    "did",
    "get",
    "come",
    "made",
    "may",
    "part",
    "over",
    "new",
    "sound",
    "take",
    "only",
    "little",
    "work",
    "know",
    "place",
    "year",
    "live",
    "back",
    "give",
    "most",
    "very",
    "after",
    "thing",
    "our",
    "just",
    "name",
    "good",
    "sentence",
    "man",
    "think",
    "say",
    "great",
    "where",
    "help",
    "through",
    "much",
    "before",
    "line",
    "right",
    "too",
    "mean",
    "old",
    "any",
    "same",
    "tell",
    "boy",
    "follow",
    "came",
    "want",
    "show",
    "also",
    "around",
    "form",
    "three",
    "small",
    "set",
    "put",
    "end",
    "does",
    "another",
    "well",
    "large",
    "must",
    "big",
    "even",
    "such",
    "because",
    "turn",
    "here",
    "why",
    "ask",
    "went",
    "men",
    "read",
    "need",
    "land",
    "different",
    "home",
    "us",
    "move",
    "try",
    "kind",
    "hand",
    "picture",
    "again",
    "change",
    "off",
    "play",
    "spell",
    "air",
    "away",
    "animal",
    "house",
    "point",
    "page",
    "letter",
    "mother",
    "answer",
    "found",
    "study",
    "still",
    "learn",
    "should",
    "world",
    "high",
    "every",
    "near",
    "add",
    "food",
    "between",
    "own",
    "below",
    "country",
    "plant",
    "last",
    "school",
    "father",
    "keep",
    "tree",
    "never",
    "start",
    "city",
    "earth",
    "eye",
    "light",
    "thought",
    "head",
    "under",
    "story",
    "saw",
    "left",
    "few",
    "while",
    "along",
    "might",
    "close",
    "something",
    "seem",
    "next",
    "hard",
    "open",
    "example",
    "begin",
    "life",
    "always",
    "those",
    "both",
    "paper",
    "together",
    "got",
    "group",
    "often",
    "run",
    "important",
    "until",
    "children",
    "side",
    "feet",
    "car",
    "mile",
    "night",
    "walk",
    "white",
    "sea",
    "began",
    "grow",
    "took",
    "river",
    "four",
    "carry",
    "state",
    "once",
    "book",
    "hear",
    "stop",
    "without",
    "second",
    "later",
    "miss",
    "idea",
    "enough",
    "eat",
    "face",
    "watch",
    "far",
    "really",
    "almost",
    "let",
    "above",
    "girl",
    "sometimes",
    "mountain",
    "cut",
    "young",
    "talk",
    "soon",
    "list",
    "song",
    "being",
    "leave",
    "family",
];

const FR_WORDS: &[&str] = &[
    "le",
    "de",
    "un",
    "être",
    "et",
    "à",
    "il",
    "avoir",
    "ne",
    "je",
    "son",
    "que",
    "se",
    "qui",
    "ce",
    "dans",
    "en",
    "du",
    "elle",
    "au",
    "pour",
    "pas",
    "vous",
    "par",
    "sur",
    "faire",
    "plus",
    "dire",
    "me",
    "on",
    "mon",
    "lui",
    "nous",
    "comme",
    "mais",
    "pouvoir",
    "avec",
    "tout",
    "aller",
    "voir",
    "bien",
    "où",
    "sans",
    "tu",
    "ou",
    "leur",
    "homme",
    "si",
    "deux",
    "mari",
    "moi",
    "vouloir",
    "te",
    "femme",
    "venir",
    "quand",
    "grand",
    "celui",
    "notre",
    "devoir",
    "là",
    "jour",
    "prendre",
    "même",
    "votre",
    "rien",
    "petit",
    "encore",
    "aussi",
    "quelque",
    "dont",
    "tout",
    "mer",
    "trouver",
    "donner",
    "temps",
    "ça",
    "peu",
    "enfant",
    "falloir",
    "alors",
    "parler",
    "seul",
    "autre",
    "jeune",
    "cela",
    "chose",
    "vie",
    "aimer",
    "dieu",
    "toujours",
    "savoir",
    "main",
    "passer",
    "chez",
    "maison",
    "rester",
    "oeil",
    "sous",
    "croire",
    "tête",
    "mettre",
    "depuis",
    "regarder",
    "appeler",
    "penser",
    "ami",
    "après",
    "monde",
    "entre",
    "porte",
    "nuit",
    "demander",
    "cœur",
    "heure",
    "trop",
    "non",
    "père",
    "connaître",
    "mère",
    "fille",
    "pendant",
    "sortir",
    "vers",
    "premier",
    "pays",
    "année",
    "lettre",
    "vieux",
    "gens",
    "ville",
    "chaque",
    "plusieurs",
    "rue",
    "nouveau",
    "matin",
    "soir",
    "beaucoup",
    "ainsi",
    "donc",
    "chercher",
    "comprendre",
    "attendre",
    "entendre",
    "vivre",
    "rendre",
    "sembler",
    "tenir",
    "écrire",
    "lire",
    "partir",
    "arriver",
    "perdre",
    "connaissance",
    "histoire",
    "parole",
    "moment",
    "pauvre",
    "raison",
    "âme",
    "affaire",
    "guerre",
    "force",
    "question",
    "fois",
    "terre",
    "route",
    "chemin",
    "fenêtre",
    "chambre",
    "voix",
    "lumière",
    "soleil",
    "arbre",
    "rivière",
    "montagne",
    "village",
    "église",
    "jardin",
    "fleur",
    "champ",
    "cheval",
    "chien",
    "livre",
    "table",
    "pain",
    "vin",
    "eau",
    "feu",
    "froid",
    "chaud",
    "blanc",
    "noir",
    "rouge",
    "belle",
    "bon",
    "mauvais",
    "long",
    "haut",
    "bas",
    "doux",
    "fort",
    "heureux",
    "triste",
    "ensemble",
    "toujours",
    "jamais",
    "souvent",
    "bientôt",
    "hier",
    "demain",
    "aujourd'hui",
    "ici",
    "loin",
    "près",
    "dehors",
    "dedans",
    "pourquoi",
    "comment",
    "parce",
    "contre",
    "chacun",
    "personne",
    "quelqu'un",
    "travail",
    "famille",
    "enfance",
    "souvenir",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Fr,
}

impl Language {
    pub fn code(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Fr => "fr",
        }
    }

    pub fn words(self) -> &'static [&'static str] {
        match self {
            Language::En => EN_WORDS,
            Language::Fr => FR_WORDS,
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Language {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "en" | "english" => Ok(Language::En),
            "fr" | "french" => Ok(Language::Fr),
            other => Err(SynthError::UnknownLanguage(other.to_string())),
        }
    }
}

/// `n` lines of 4 to 9 words drawn from the language's word list. Accented
/// letters are kept; fold them before rendering.
pub fn generate_lines(language: Language, n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = language.words();
    (0..n)
        .map(|_| {
            let k = rng.random_range(4..=9);
            let mut line: Vec<String> = (0..k)
                .map(|_| (*words.choose(&mut rng).expect("non-empty")).to_string())
                .collect();
            let mut first = line[0].chars();
            if let Some(c) = first.next() {
                line[0] = c.to_uppercase().chain(first).collect();
            }
            let mut s = line.join(" ");
            if rng.random_bool(0.5) {
                s.push(if rng.random_bool(0.8) { '.' } else { ',' });
            }
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_shaped() {
        let a = generate_lines(Language::Fr, 20, 1);
        assert_eq!(a, generate_lines(Language::Fr, 20, 1));
        assert_ne!(a, generate_lines(Language::Fr, 20, 2));
        for l in &a {
            let n = l.split(' ').count();
            assert!((4..=9).contains(&n), "{l}");
            assert!(l.chars().next().unwrap().is_uppercase());
        }
    }

    #[test]
    fn language_codes() {
        assert_eq!("EN".parse::<Language>().unwrap(), Language::En);
        assert_eq!(Language::Fr.to_string(), "fr");
        assert!("de".parse::<Language>().is_err());
    }
}
