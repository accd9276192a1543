#include "punctr/punct_codec.hpp"

#include <cctype>

#include "punctr/util.hpp"

namespace punctr {

const char* label_name(PunctLabel label) {
    switch (label) {
        case PunctLabel::Period: return "PERIOD";
        case PunctLabel::Comma: return "COMMA";
        case PunctLabel::QuestionMark: return "QUESTIONMARK";
        case PunctLabel::None: return "NONE";
    }
    return "NONE";
}

PunctLabel label_from_name(const std::string& name) {
    if (name == "PERIOD") return PunctLabel::Period;
    if (name == "COMMA") return PunctLabel::Comma;
    if (name == "QUESTIONMARK") return PunctLabel::QuestionMark;
    if (name == "NONE") return PunctLabel::None;
    throw InputError("unknown punctuation label: " + name);
}

namespace {

enum class CharClass {
    Word,        // letters, digits, unclassified non-ASCII
    Apostrophe,  // part of the word only between word characters
    Hyphen,      // same rule as apostrophe
    Period,      // '.' and '!' (exclamations become periods)
    Comma,
    Question,
    OtherPunct,  // recognized as punctuation but not a label; dropped
    Space,
};

struct Cp {
    uint32_t value;
    size_t length;  // bytes consumed
};

Cp decode_utf8(const std::string& s, size_t i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) return {c, 1};
    size_t need = (c & 0xE0) == 0xC0 ? 1 : (c & 0xF0) == 0xE0 ? 2 : (c & 0xF8) == 0xF0 ? 3 : 0;
    if (need == 0 || i + need >= s.size()) return {c, 1};  // lenient on malformed input
    uint32_t cp = c & (0x3F >> need);
    for (size_t k = 1; k <= need; ++k) {
        unsigned char cc = static_cast<unsigned char>(s[i + k]);
        if ((cc & 0xC0) != 0x80) return {c, 1};
        cp = (cp << 6) | (cc & 0x3F);
    }
    return {cp, need + 1};
}

CharClass classify(uint32_t cp) {
    if (cp < 0x80) {
        char c = static_cast<char>(cp);
        if (std::isalnum(static_cast<unsigned char>(c))) return CharClass::Word;
        if (std::isspace(static_cast<unsigned char>(c))) return CharClass::Space;
        switch (c) {
            case '.':
            case '!': return CharClass::Period;
            case ',': return CharClass::Comma;
            case '?': return CharClass::Question;
            case '\'': return CharClass::Apostrophe;
            case '-': return CharClass::Hyphen;
            default: return CharClass::OtherPunct;
        }
    }
    if (cp == 0x2019) return CharClass::Apostrophe;          // curly apostrophe
    if (cp >= 0x2010 && cp <= 0x2015) return CharClass::Hyphen;  // hyphens, en/em dashes
    if (cp == 0x00A0) return CharClass::Space;
    if (cp == 0x00A1 || cp == 0x00BF || cp == 0x00AB || cp == 0x00BB) return CharClass::OtherPunct;
    if (cp >= 0x2000 && cp <= 0x206F) return CharClass::OtherPunct;  // general punctuation
    return CharClass::Word;
}

// En/em dashes never join words; ASCII '-' and apostrophes do.
bool may_join(uint32_t cp) { return cp == '\'' || cp == '-' || cp == 0x2019; }

LabeledSequence scan(const std::string& text) {
    LabeledSequence out;
    std::string cur;

    auto flush = [&] {
        if (!cur.empty()) {
            out.tokens.push_back(lowercase(cur));
            out.labels.push_back(PunctLabel::None);
            cur.clear();
        }
    };
    auto mark = [&](PunctLabel label) {
        flush();
        if (!out.labels.empty() && out.labels.back() == PunctLabel::None)
            out.labels.back() = label;
    };

    size_t i = 0;
    while (i < text.size()) {
        Cp cp = decode_utf8(text, i);
        CharClass cls = classify(cp.value);
        if ((cls == CharClass::Apostrophe || cls == CharClass::Hyphen) && may_join(cp.value)) {
            // keep only between word characters: don't, real-time
            bool prev_word = !cur.empty();
            bool next_word = false;
            if (i + cp.length < text.size()) {
                Cp nxt = decode_utf8(text, i + cp.length);
                next_word = classify(nxt.value) == CharClass::Word;
            }
            if (prev_word && next_word)
                cur.append(text, i, cp.length);
            // a dropped apostrophe/hyphen is unrecognized punctuation: no label
            i += cp.length;
            continue;
        }
        switch (cls) {
            case CharClass::Word: cur.append(text, i, cp.length); break;
            case CharClass::Space: flush(); break;
            case CharClass::Period: mark(PunctLabel::Period); break;
            case CharClass::Comma: mark(PunctLabel::Comma); break;
            case CharClass::Question: mark(PunctLabel::QuestionMark); break;
            case CharClass::Apostrophe:
            case CharClass::Hyphen:
            case CharClass::OtherPunct: flush(); break;  // dropped, label stays None
        }
        i += cp.length;
    }
    flush();
    return out;
}

}  // namespace

LabeledSequence extract_labels(const std::string& text) {
    LabeledSequence seq = scan(text);
    if (seq.tokens.empty()) throw InputError("no word tokens in input: \"" + text + "\"");
    return seq;
}

std::string apply_labels(const LabeledSequence& seq) {
    if (seq.tokens.size() != seq.labels.size())
        throw InputError("token/label length mismatch");
    std::string out;
    for (size_t i = 0; i < seq.tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += seq.tokens[i];
        switch (seq.labels[i]) {
            case PunctLabel::Period: out.push_back('.'); break;
            case PunctLabel::Comma: out.push_back(','); break;
            case PunctLabel::QuestionMark: out.push_back('?'); break;
            case PunctLabel::None: break;
        }
    }
    return out;
}

std::string strip_punctuation(const std::string& text) {
    return join_tokens(scan(text).tokens);
}

}  // namespace punctr
