#include "biasloupe/text.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include "biasloupe/errors.hpp"

namespace biasloupe {

void warn(const std::string& message) {
    std::cerr << "warning: " << message << std::endl;
}

namespace {

struct Codepoint {
    char32_t cp;
    uint32_t begin;
    uint32_t end;
};

// Decodes UTF-8; invalid bytes come out as U+FFFD and act as separators.
std::vector<Codepoint> decode_utf8(std::string_view text) {
    std::vector<Codepoint> out;
    out.reserve(text.size());
    size_t i = 0;
    const auto byte = [&](size_t k) { return static_cast<unsigned char>(text[k]); };
    while (i < text.size()) {
        unsigned char b0 = byte(i);
        char32_t cp = 0xFFFD;
        size_t len = 1;
        if (b0 < 0x80) {
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0 && i + 1 < text.size() && (byte(i + 1) & 0xC0) == 0x80) {
            cp = ((b0 & 0x1Fu) << 6) | (byte(i + 1) & 0x3Fu);
            len = 2;
            if (cp < 0x80) cp = 0xFFFD;
        } else if ((b0 & 0xF0) == 0xE0 && i + 2 < text.size() && (byte(i + 1) & 0xC0) == 0x80 &&
                   (byte(i + 2) & 0xC0) == 0x80) {
            cp = ((b0 & 0x0Fu) << 12) | ((byte(i + 1) & 0x3Fu) << 6) | (byte(i + 2) & 0x3Fu);
            len = 3;
            if (cp < 0x800) cp = 0xFFFD;
        } else if ((b0 & 0xF8) == 0xF0 && i + 3 < text.size() && (byte(i + 1) & 0xC0) == 0x80 &&
                   (byte(i + 2) & 0xC0) == 0x80 && (byte(i + 3) & 0xC0) == 0x80) {
            cp = ((b0 & 0x07u) << 18) | ((byte(i + 1) & 0x3Fu) << 12) | ((byte(i + 2) & 0x3Fu) << 6) |
                 (byte(i + 3) & 0x3Fu);
            len = 4;
            if (cp < 0x10000 || cp > 0x10FFFF) cp = 0xFFFD;
        }
        out.push_back({cp, static_cast<uint32_t>(i), static_cast<uint32_t>(i + len)});
        i += len;
    }
    return out;
}

void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_space_cp(char32_t cp) {
    switch (cp) {
        case U' ': case U'\t': case U'\n': case U'\r': case U'\v': case U'\f':
        case 0x00A0: case 0x1680: case 0x2028: case 0x2029: case 0x202F:
        case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200B;
    }
}

bool is_word_cp(char32_t cp) {
    if (cp < 0x80)
        return (cp >= U'0' && cp <= U'9') || (cp >= U'A' && cp <= U'Z') || (cp >= U'a' && cp <= U'z');
    if (cp == 0xFFFD || is_space_cp(cp)) return false;
    // Common non-ASCII punctuation; everything else non-spacing is a word char.
    if (cp == 0x00A1 || cp == 0x00BF || cp == 0x00AB || cp == 0x00BB || cp == 0x00B7) return false;
    if (cp >= 0x2010 && cp <= 0x2027) return false;
    if (cp >= 0x2030 && cp <= 0x205E) return false;
    if (cp >= 0x3001 && cp <= 0x303F) return false;
    return true;
}

bool is_joiner_cp(char32_t cp) {
    return cp == U'\'' || cp == 0x2019 || cp == U'-';
}

bool is_terminal_cp(char32_t cp) {
    return cp == U'.' || cp == U'!' || cp == U'?' || cp == 0x2026;
}

bool is_opening_cp(char32_t cp) {
    switch (cp) {
        case 0x00BF: case 0x00A1: case 0x00AB: // ¿ ¡ «
        case 0x201C: case 0x2018:              // “ ‘
        case U'"': case U'\'': case U'(': case U'[':
        case 0x2014: case 0x2013:              // — –
            return true;
        default:
            return false;
    }
}

std::vector<std::string> read_list_file(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(std::string(what) + " file not readable: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        lines.push_back(line);
    }
    return lines;
}

} // namespace

char32_t fold_codepoint(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
    if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20; // Latin-1 À..Þ
    if (cp >= 0x0100 && cp <= 0x012F) return (cp | 1u);
    if (cp == 0x0130) return cp; // İ has no simple fold
    if (cp >= 0x0132 && cp <= 0x0137) return (cp | 1u);
    if (cp >= 0x0139 && cp <= 0x0148) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x014A && cp <= 0x0177) return (cp | 1u);
    if (cp == 0x0178) return 0x00FF; // Ÿ
    if (cp == 0x0179 || cp == 0x017B || cp == 0x017D) return cp + 1;
    if (cp == 0x017F) return U's'; // long s
    if (cp == 0x1E9E) return 0x00DF; // ẞ
    if (cp >= 0x0391 && cp <= 0x03A9 && cp != 0x03A2) return cp + 0x20; // Greek
    if (cp >= 0x0400 && cp <= 0x040F) return cp + 0x50; // Cyrillic Ѐ..Џ
    if (cp >= 0x0410 && cp <= 0x042F) return cp + 0x20; // Cyrillic А..Я
    return cp;
}

bool is_uppercase(char32_t cp) {
    return fold_codepoint(cp) != cp;
}

std::string fold_utf8(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (const auto& c : decode_utf8(text)) encode_utf8(fold_codepoint(c.cp), out);
    return out;
}

LemmaDictionary LemmaDictionary::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("lemma dictionary not readable: " + path);
    LemmaDictionary dict;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
            throw IoError("lemma dictionary " + path + " line " + std::to_string(lineno) +
                          ": expected `form<TAB>lemma`");
        dict.map_[fold_utf8(line.substr(0, tab))] = fold_utf8(line.substr(tab + 1));
    }
    dict.finalize();
    return dict;
}

LemmaDictionary LemmaDictionary::from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs) {
    LemmaDictionary dict;
    for (const auto& [form, lemma] : pairs) dict.map_[fold_utf8(form)] = fold_utf8(lemma);
    dict.finalize();
    return dict;
}

void LemmaDictionary::finalize() {
    // Idempotence: every lemma must map to itself.
    std::vector<std::string> lemmas;
    lemmas.reserve(map_.size());
    for (const auto& [form, lemma] : map_) lemmas.push_back(lemma);
    for (const auto& lemma : lemmas) {
        auto it = map_.find(lemma);
        if (it == map_.end()) {
            map_.emplace(lemma, lemma);
        } else if (it->second != lemma) {
            throw IoError("lemma dictionary is not idempotent: '" + lemma + "' -> '" + it->second +
                          "' while also used as a lemma");
        }
    }
}

const std::string& LemmaDictionary::lemma_of(const std::string& lower) const {
    auto it = map_.find(lower);
    return it == map_.end() ? lower : it->second;
}

StopwordSet StopwordSet::load(const std::string& path) {
    StopwordSet s;
    for (const auto& line : read_list_file(path, "stopword")) s.set_.insert(fold_utf8(line));
    return s;
}

StopwordSet StopwordSet::from_words(const std::vector<std::string>& words) {
    StopwordSet s;
    for (const auto& w : words) s.set_.insert(fold_utf8(w));
    return s;
}

const AbbrevSet& default_abbreviations() {
    static const AbbrevSet abbrevs = {
        "sr", "sra", "srta", "dr", "dra", "prof", "lic", "ing", "arq", "gral",
        "av", "avda", "etc", "ej", "pág", "núm", "ud", "uds", "vs", "art",
    };
    return abbrevs;
}

AbbrevSet load_abbreviations(const std::string& path) {
    AbbrevSet abbrevs;
    for (const auto& line : read_list_file(path, "abbreviation")) {
        std::string a = fold_utf8(line);
        while (!a.empty() && a.back() == '.') a.pop_back(); // stored without the dot
        if (!a.empty()) abbrevs.insert(a);
    }
    return abbrevs;
}

TextScan scan_text(std::string_view text, const LemmaDictionary& dict, const StopwordSet& stops) {
    TextScan scan;
    const auto cps = decode_utf8(text);
    const size_t n = cps.size();
    size_t i = 0;
    while (i < n) {
        const char32_t cp = cps[i].cp;
        if (is_word_cp(cp)) {
            const size_t start = i;
            size_t j = i + 1;
            while (j < n) {
                if (is_word_cp(cps[j].cp)) {
                    ++j;
                } else if (is_joiner_cp(cps[j].cp) && is_word_cp(cps[j - 1].cp) && j + 1 < n &&
                           is_word_cp(cps[j + 1].cp)) {
                    ++j;
                } else {
                    break;
                }
            }
            Token tok;
            tok.begin = cps[start].begin;
            tok.end = cps[j - 1].end;
            tok.surface.assign(text.substr(tok.begin, tok.end - tok.begin));
            tok.lower.reserve(tok.surface.size());
            for (size_t k = start; k < j; ++k) encode_utf8(fold_codepoint(cps[k].cp), tok.lower);
            tok.is_stopword = stops.contains(tok.lower);
            tok.lemma = tok.is_stopword ? tok.lower : dict.lemma_of(tok.lower);
            scan.tokens.push_back(std::move(tok));
            i = j;
        } else {
            if (!is_space_cp(cp))
                scan.signals.push_back({cps[i].begin, cps[i].end, cp, is_terminal_cp(cp)});
            ++i;
        }
    }
    return scan;
}

std::vector<Token> tokenize(std::string_view text, const LemmaDictionary& dict, const StopwordSet& stops) {
    return scan_text(text, dict, stops).tokens;
}

std::vector<Sentence> split_sentences(std::string_view text, const LemmaDictionary& dict,
                                      const StopwordSet& stops, const AbbrevSet& abbrevs) {
    TextScan scan = scan_text(text, dict, stops);
    const auto cps = decode_utf8(text);

    // Byte positions immediately after a sentence-terminal run that counts
    // as a boundary.
    std::vector<uint32_t> boundaries;
    for (size_t s = 0; s < scan.signals.size(); ++s) {
        if (!scan.signals[s].terminal) continue;
        // Collapse a run of terminal signals (e.g. "...") into one.
        size_t last = s;
        while (last + 1 < scan.signals.size() && scan.signals[last + 1].terminal &&
               scan.signals[last + 1].pos == scan.signals[last].end)
            ++last;
        const uint32_t run_end = scan.signals[last].end;

        bool boundary = false;
        // Locate the first codepoint at/after run_end.
        size_t ci = 0;
        while (ci < cps.size() && cps[ci].begin < run_end) ++ci;
        if (ci >= cps.size()) {
            boundary = true; // end of text
        } else if (is_space_cp(cps[ci].cp)) {
            while (ci < cps.size() && is_space_cp(cps[ci].cp)) ++ci;
            if (ci >= cps.size() || is_uppercase(cps[ci].cp) || is_opening_cp(cps[ci].cp))
                boundary = true;
        }

        if (boundary && scan.signals[s].cp == U'.' && s == last) {
            // Abbreviation check: the token directly before a single '.'.
            const Token* prev = nullptr;
            for (const auto& t : scan.tokens) {
                if (t.end == scan.signals[s].pos) { prev = &t; break; }
                if (t.begin >= scan.signals[s].pos) break;
            }
            if (prev && abbrevs.count(prev->lower)) boundary = false;
        }
        if (boundary) boundaries.push_back(run_end);
        s = last;
    }

    // Trim trailing whitespace off the final span.
    uint32_t text_end = static_cast<uint32_t>(text.size());
    for (auto it = cps.rbegin(); it != cps.rend(); ++it) {
        if (!is_space_cp(it->cp)) { text_end = it->end; break; }
        text_end = it->begin;
    }
    if (boundaries.empty() || boundaries.back() < text_end) boundaries.push_back(text_end);

    std::vector<Sentence> sentences;
    size_t tok_i = 0, sig_i = 0;
    uint32_t cursor = 0;
    for (uint32_t bend : boundaries) {
        // Skip leading whitespace.
        size_t ci = 0;
        while (ci < cps.size() && cps[ci].begin < cursor) ++ci;
        while (ci < cps.size() && cps[ci].begin < bend && is_space_cp(cps[ci].cp)) ++ci;
        const uint32_t sbegin = (ci < cps.size() && cps[ci].begin < bend) ? cps[ci].begin : cursor;

        Sentence sent;
        sent.begin = sbegin;
        sent.end = bend;
        uint32_t prev_token_end = sbegin;
        std::vector<std::pair<uint32_t, uint32_t>> sig_spans;
        while (sig_i < scan.signals.size() && scan.signals[sig_i].pos < bend) {
            sig_spans.emplace_back(scan.signals[sig_i].pos, scan.signals[sig_i].end);
            ++sig_i;
        }
        while (tok_i < scan.tokens.size() && scan.tokens[tok_i].begin < bend) {
            Token tok = scan.tokens[tok_i++];
            tok.boundary_before = false;
            for (const auto& [sp, se] : sig_spans) {
                if (sp >= prev_token_end && sp < tok.begin && !sent.tokens.empty()) {
                    tok.boundary_before = true;
                    break;
                }
            }
            prev_token_end = tok.end;
            sent.tokens.push_back(std::move(tok));
        }
        cursor = bend;
        if (sent.tokens.empty()) continue; // punctuation-only stretch
        sent.index = static_cast<int>(sentences.size());
        sentences.push_back(std::move(sent));
    }
    return sentences;
}

std::vector<NGramOccurrence> extract_ngrams(const Sentence& sentence, const NgramLimits& limits) {
    std::vector<NGramOccurrence> out;
    const auto& toks = sentence.tokens;
    const int n = static_cast<int>(toks.size());
    for (int i = 0; i < n; ++i) {
        if (toks[i].is_stopword) continue;
        int content = 0;
        for (int j = i; j < n && j - i < limits.max_surface_len; ++j) {
            if (j > i && toks[j].boundary_before) break; // punctuation signal
            if (!toks[j].is_stopword) ++content;
            if (content > limits.max_content) break;
            if (toks[j].is_stopword) continue; // edge rule: last token must be content

            NGramOccurrence occ;
            occ.sentence_index = sentence.index;
            occ.token_begin = i;
            occ.token_end = j + 1;
            occ.content_lemmas.reserve(content);
            for (int k = i; k <= j; ++k) {
                if (!occ.surface.empty()) occ.surface += ' ';
                occ.surface += toks[k].surface;
                if (!toks[k].is_stopword) occ.content_lemmas.push_back(toks[k].lemma);
            }
            out.push_back(std::move(occ));
        }
    }
    return out;
}

} // namespace biasloupe
