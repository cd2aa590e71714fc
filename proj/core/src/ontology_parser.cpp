#include "semcomp/error.hpp"
#include "semcomp/ontology.hpp"

#include <nlohmann/json.hpp>

#include <cctype>

namespace semcomp {

namespace {

bool is_pname_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_pname_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

class LineParser {
public:
    LineParser(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) {}

    // Returns false for blank and comment-only lines.
    bool parse(Triple &out) {
        skip_ws();
        if (at_end() || peek() == '#') return false;
        out.subject = vocab::canonical(term("subject"));
        require_ws();
        out.predicate = vocab::canonical(term("predicate"));
        require_ws();
        if (peek() == '"') {
            out.object = literal();
            out.object_is_literal = true;
        } else {
            out.object = vocab::canonical(term("object"));
            out.object_is_literal = false;
        }
        skip_ws();
        if (at_end() || peek() != '.') fail("expected '.' terminating the statement");
        ++pos_;
        skip_ws();
        if (!at_end() && peek() != '#') fail("unexpected text after '.'");
        return true;
    }

private:
    bool at_end() const { return pos_ >= line_.size(); }
    char peek() const { return line_[pos_]; }

    [[noreturn]] void fail(const std::string &message) const {
        throw ParseError(line_no_, pos_ + 1, message);
    }

    void skip_ws() {
        while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
    }

    void require_ws() {
        if (at_end() || (peek() != ' ' && peek() != '\t')) fail("expected whitespace");
        skip_ws();
    }

    std::string term(const char *role) {
        if (at_end()) fail(std::string("missing ") + role);
        if (peek() == '<') {
            std::size_t start = ++pos_;
            while (!at_end() && peek() != '>') {
                char c = peek();
                if (c == '<' || c == '"' || c == ' ' || c == '\t' || c == '{' || c == '}' ||
                    c == '|' || c == '^' || c == '`' || c == '\\') {
                    fail("invalid character in IRI");
                }
                ++pos_;
            }
            if (at_end()) fail("unterminated IRI");
            std::string iri(line_.substr(start, pos_ - start));
            ++pos_;
            if (iri.empty()) fail("empty IRI");
            return iri;
        }
        if (!is_pname_start(peek())) fail(std::string("expected IRI or prefixed name for ") + role);
        std::size_t start = pos_;
        while (!at_end() && is_pname_char(peek())) ++pos_;
        if (at_end() || peek() != ':') fail("prefixed name requires ':'");
        ++pos_;
        while (!at_end() && is_pname_char(peek())) ++pos_;
        // A trailing '.' belongs to the statement terminator.
        while (pos_ > start && line_[pos_ - 1] == '.') --pos_;
        return std::string(line_.substr(start, pos_ - start));
    }

    std::string literal() {
        ++pos_;
        std::string value;
        while (true) {
            if (at_end()) fail("unterminated literal");
            char c = peek();
            ++pos_;
            if (c == '"') break;
            if (c != '\\') {
                value += c;
                continue;
            }
            if (at_end()) fail("dangling escape");
            char e = peek();
            ++pos_;
            switch (e) {
            case 'n': value += '\n'; break;
            case 't': value += '\t'; break;
            case 'r': value += '\r'; break;
            case '"': value += '"'; break;
            case '\\': value += '\\'; break;
            default: fail("unknown escape");
            }
        }
        if (!at_end() && peek() == '@') {
            ++pos_;
            while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-'))
                ++pos_;
        } else if (!at_end() && peek() == '^') {
            if (pos_ + 1 >= line_.size() || line_[pos_ + 1] != '^') fail("expected '^^'");
            pos_ += 2;
            term("datatype");
        }
        return value;
    }

    std::string_view line_;
    std::size_t line_no_;
    std::size_t pos_ = 0;
};

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

std::vector<std::string> string_or_list(const nlohmann::json &value, const std::string &where) {
    std::vector<std::string> out;
    if (value.is_null()) return out;
    if (value.is_string()) {
        out.push_back(value.get<std::string>());
        return out;
    }
    if (!value.is_array()) throw ParseError(1, 1, where + ": expected string or list of strings");
    for (const auto &item : value) {
        if (!item.is_string()) throw ParseError(1, 1, where + ": expected string");
        out.push_back(item.get<std::string>());
    }
    return out;
}

std::string required_string(const nlohmann::json &obj, const char *key, const std::string &where) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string() || it->get<std::string>().empty()) {
        throw ParseError(1, 1, where + ": missing string field '" + key + "'");
    }
    return it->get<std::string>();
}

}  // namespace

OntologyDocument parse_triples(std::string_view text) {
    OntologyDocument doc;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        Triple t;
        if (LineParser(text.substr(start, end - start), line_no).parse(t)) {
            doc.triples.push_back(std::move(t));
        }
        if (end == text.size()) break;
        start = end + 1;
    }
    return doc;
}

OntologyDocument parse_structured(std::string_view text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        auto [line, column] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError(line, column, "malformed structured ontology document");
    }
    if (!root.is_object()) throw ParseError(1, 1, "ontology document must be an object");

    OntologyDocument doc;
    auto add = [&](std::string s, std::string_view p, std::string o, bool literal = false) {
        doc.triples.push_back({vocab::canonical(s), std::string(p),
                               literal ? std::move(o) : vocab::canonical(o), literal});
    };
    if (auto it = root.find("classes"); it != root.end()) {
        if (!it->is_array()) throw ParseError(1, 1, "'classes' must be a list");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto &c = (*it)[i];
            std::string where = "classes[" + std::to_string(i) + "]";
            if (!c.is_object()) throw ParseError(1, 1, where + ": expected object");
            std::string iri = required_string(c, "iri", where);
            add(iri, vocab::kType, std::string(vocab::kClass));
            for (auto &parent : string_or_list(c.value("subclass_of", nlohmann::json()), where))
                add(iri, vocab::kSubClassOf, parent);
            if (auto label = c.find("label"); label != c.end() && label->is_string())
                add(iri, vocab::kLabel, label->get<std::string>(), true);
        }
    }
    if (auto it = root.find("properties"); it != root.end()) {
        if (!it->is_array()) throw ParseError(1, 1, "'properties' must be a list");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto &p = (*it)[i];
            std::string where = "properties[" + std::to_string(i) + "]";
            if (!p.is_object()) throw ParseError(1, 1, where + ": expected object");
            std::string iri = required_string(p, "iri", where);
            add(iri, vocab::kType, std::string(vocab::kProperty));
            for (auto &parent : string_or_list(p.value("subproperty_of", nlohmann::json()), where))
                add(iri, vocab::kSubPropertyOf, parent);
            for (auto &d : string_or_list(p.value("domain", nlohmann::json()), where))
                add(iri, vocab::kDomain, d);
            for (auto &r : string_or_list(p.value("range", nlohmann::json()), where))
                add(iri, vocab::kRange, r);
        }
    }
    if (auto it = root.find("triples"); it != root.end()) {
        if (!it->is_array()) throw ParseError(1, 1, "'triples' must be a list");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto &t = (*it)[i];
            std::string where = "triples[" + std::to_string(i) + "]";
            if (!t.is_array() || t.size() != 3 || !t[0].is_string() || !t[1].is_string()) {
                throw ParseError(1, 1, where + ": expected [subject, predicate, object]");
            }
            if (t[2].is_object() && t[2].contains("literal")) {
                add(t[0].get<std::string>(), vocab::canonical(t[1].get<std::string>()),
                    t[2]["literal"].get<std::string>(), true);
            } else if (t[2].is_string()) {
                add(t[0].get<std::string>(), vocab::canonical(t[1].get<std::string>()),
                    t[2].get<std::string>());
            } else {
                throw ParseError(1, 1, where + ": object must be a string or {\"literal\": ...}");
            }
        }
    }
    return doc;
}

OntologyDocument parse_ontology(std::string_view text) {
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (c == '{') return parse_structured(text);
        break;
    }
    return parse_triples(text);
}

namespace {

std::string write_term(const std::string &id) {
    // Prefixed vocabulary stays bare; everything else is bracketed.
    if (id.starts_with("rdf:") || id.starts_with("rdfs:") || id.starts_with("owl:")) return id;
    return "<" + id + ">";
}

std::string write_literal(const std::string &value) {
    std::string out = "\"";
    for (char c : value) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default: out += c;
        }
    }
    return out + "\"";
}

}  // namespace

std::string to_triples_text(const OntologyDocument &document) {
    std::string out;
    for (const auto &t : document.triples) {
        out += write_term(t.subject);
        out += ' ';
        out += write_term(t.predicate);
        out += ' ';
        out += t.object_is_literal ? write_literal(t.object) : write_term(t.object);
        out += " .\n";
    }
    return out;
}

}  // namespace semcomp
