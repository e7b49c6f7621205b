#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmwave/milp.hpp"
#include "mmwave/numfmt.hpp"

namespace mmwave {

namespace lp {

inline void append_term(std::string& line, std::ostream& os, double coef, const std::string& name) {
    std::string term = coef < 0 ? " - " : " + ";
    term += format_double(std::abs(coef)) + " " + name;
    if (line.size() + term.size() > 240) {
        os << line << "\n";
        line = "   ";
    }
    line += term;
}

} // namespace lp

/// Write the model in CPLEX LP text format. All integer variables are listed
/// under Generals; their 0/1 nature, where applicable, is carried by Bounds.
inline void write_lp(const milp::Model& model, std::ostream& os) {
    os << "\\ " << model.vars.size() << " variables, " << model.rows.size() << " constraints\n";
    os << (model.maximize ? "Maximize" : "Minimize") << "\n";
    std::string line = " obj:";
    for (const auto& v : model.vars) {
        if (v.obj == 0.0) continue;
        lp::append_term(line, os, v.obj, v.name);
    }
    if (model.obj_constant != 0.0)
        line += (model.obj_constant < 0 ? " - " : " + ") + format_double(std::abs(model.obj_constant));
    os << line << "\n";

    os << "Subject To\n";
    for (const auto& row : model.rows) {
        line = " " + row.name + ":";
        for (const auto& [j, c] : row.coeffs) lp::append_term(line, os, c, model.vars[j].name);
        const char* sense = row.sense == milp::Sense::LE ? "<=" : row.sense == milp::Sense::GE ? ">=" : "=";
        line += std::string(" ") + sense + " " + format_double(row.rhs);
        os << line << "\n";
    }

    os << "Bounds\n";
    for (const auto& v : model.vars) {
        if (std::isinf(v.ub))
            os << " " << format_double(v.lb) << " <= " << v.name << "\n";
        else
            os << " " << format_double(v.lb) << " <= " << v.name << " <= " << format_double(v.ub)
               << "\n";
    }

    bool any_integer = false;
    for (const auto& v : model.vars) any_integer = any_integer || v.integer;
    if (any_integer) {
        os << "Generals\n";
        line = "";
        for (const auto& v : model.vars) {
            if (!v.integer) continue;
            if (line.size() + v.name.size() + 1 > 240) {
                os << line << "\n";
                line.clear();
            }
            line += " " + v.name;
        }
        if (!line.empty()) os << line << "\n";
    }
    os << "End\n";
}

inline void write_lp_file(const milp::Model& model, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_lp(model, os);
}

namespace lp {

struct Token {
    enum Kind { Name, Number, Op, EndOfFile } kind = EndOfFile;
    std::string text;
    double value = 0.0;
};

class Lexer {
public:
    explicit Lexer(std::string text) : text_(std::move(text)) {}

    Token next() {
        skip_space_and_comments();
        if (pos_ >= text_.size()) return {Token::EndOfFile, "", 0.0};
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return lex_number();
        if (c == '<' || c == '>' || c == '=') {
            std::string op(1, text_[pos_++]);
            if (pos_ < text_.size() && (text_[pos_] == '=' || text_[pos_] == '<' || text_[pos_] == '>'))
                op += text_[pos_++];
            return {Token::Op, op, 0.0};
        }
        if (c == '+' || c == '-' || c == ':') {
            ++pos_;
            return {Token::Op, std::string(1, c), 0.0};
        }
        return lex_name();
    }

    Token peek() {
        const std::size_t save = pos_;
        Token t = next();
        pos_ = save;
        return t;
    }

    std::size_t tell() const { return pos_; }
    void seek(std::size_t pos) { pos_ = pos; }

private:
    void skip_space_and_comments() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '\\') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    Token lex_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
            ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
                pos_ = p;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            }
        }
        const std::string s = text_.substr(start, pos_ - start);
        return {Token::Number, s, std::strtod(s.c_str(), nullptr)};
    }

    Token lex_name() {
        const std::size_t start = pos_;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '(' ||
                c == ')' || c == '[' || c == ']')
                ++pos_;
            else
                break;
        }
        if (pos_ == start) throw std::runtime_error("lp parse: unexpected character");
        return {Token::Name, text_.substr(start, pos_ - start), 0.0};
    }

    std::string text_;
    std::size_t pos_ = 0;
};

inline std::string lowercase(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline bool is_section_keyword(const std::string& lower) {
    return lower == "maximize" || lower == "minimize" || lower == "max" || lower == "min" ||
           lower == "subject" || lower == "st" || lower == "s.t." || lower == "bounds" ||
           lower == "bound" || lower == "general" || lower == "generals" || lower == "gen" ||
           lower == "integer" || lower == "integers" || lower == "binary" || lower == "binaries" ||
           lower == "bin" || lower == "end";
}

} // namespace lp

/// Parse a CPLEX LP file back into a model. Covers the subset this project
/// writes plus common variations: named rows, objective constants, two-sided
/// bounds, Generals/Binaries sections.
inline milp::Model read_lp(const std::string& text) {
    using lp::Token;
    lp::Lexer lex(text);
    milp::Model model;
    std::map<std::string, int> var_index;
    auto var_of = [&](const std::string& name) {
        auto it = var_index.find(name);
        if (it != var_index.end()) return it->second;
        const int idx = model.add_var(name, 0.0, milp::kInf, 0.0, false);
        var_index.emplace(name, idx);
        return idx;
    };

    Token t = lex.next();
    std::string section = lp::lowercase(t.text);
    if (section == "maximize" || section == "max")
        model.maximize = true;
    else if (section == "minimize" || section == "min")
        model.maximize = false;
    else
        throw std::runtime_error("lp parse: expected objective sense, got '" + t.text + "'");

    // linear expression: [label:] { [+|-] [number] [name] } ...
    auto parse_expr = [&](std::vector<std::pair<int, double>>& coeffs, double& constant) {
        while (true) {
            Token p = lex.peek();
            if (p.kind == Token::EndOfFile) return p;
            if (p.kind == Token::Name && lp::is_section_keyword(lp::lowercase(p.text))) return p;
            if (p.kind == Token::Op && (p.text == "<=" || p.text == ">=" || p.text == "=" ||
                                        p.text == "=<" || p.text == "=>" || p.text == "<" ||
                                        p.text == ">"))
                return p;
            double sign = 1.0;
            Token tok = lex.next();
            while (tok.kind == Token::Op && (tok.text == "+" || tok.text == "-")) {
                if (tok.text == "-") sign = -sign;
                tok = lex.next();
            }
            if (tok.kind == Token::Number) {
                const Token after = lex.peek();
                if (after.kind == Token::Name && !lp::is_section_keyword(lp::lowercase(after.text))) {
                    Token name = lex.next();
                    coeffs.push_back({var_of(name.text), sign * tok.value});
                } else {
                    constant += sign * tok.value;
                }
            } else if (tok.kind == Token::Name) {
                coeffs.push_back({var_of(tok.text), sign});
            } else {
                throw std::runtime_error("lp parse: unexpected token '" + tok.text + "'");
            }
        }
    };

    // objective (an optional "label:" prefix)
    {
        const std::size_t mark = lex.tell();
        Token p = lex.peek();
        if (p.kind == Token::Name) {
            lex.next();
            Token colon = lex.peek();
            if (colon.kind == Token::Op && colon.text == ":")
                lex.next();
            else
                lex.seek(mark);  // unlabeled objective starting with a variable
        }
        std::vector<std::pair<int, double>> coeffs;
        double constant = 0.0;
        parse_expr(coeffs, constant);
        for (const auto& [j, c] : coeffs) model.vars[j].obj += c;
        model.obj_constant = constant;
    }

    t = lex.next();
    section = lp::lowercase(t.text);
    if (section == "subject" || section == "st" || section == "s.t.") {
        if (section == "subject") lex.next();  // "To"
        while (true) {
            Token p = lex.peek();
            if (p.kind == Token::EndOfFile) break;
            if (p.kind == Token::Name && lp::is_section_keyword(lp::lowercase(p.text))) break;
            std::string row_name;
            Token first = lex.next();
            Token maybe_colon = lex.peek();
            if (first.kind == Token::Name && maybe_colon.kind == Token::Op && maybe_colon.text == ":") {
                lex.next();
                row_name = first.text;
            } else {
                throw std::runtime_error("lp parse: constraint rows must be named");
            }
            std::vector<std::pair<int, double>> coeffs;
            double constant = 0.0;
            Token stop = parse_expr(coeffs, constant);
            if (stop.kind != Token::Op)
                throw std::runtime_error("lp parse: missing sense in row " + row_name);
            Token sense_tok = lex.next();
            milp::Sense sense = milp::Sense::EQ;
            if (sense_tok.text == "<=" || sense_tok.text == "=<" || sense_tok.text == "<")
                sense = milp::Sense::LE;
            else if (sense_tok.text == ">=" || sense_tok.text == "=>" || sense_tok.text == ">")
                sense = milp::Sense::GE;
            double rhs_sign = 1.0;
            Token rhs = lex.next();
            while (rhs.kind == Token::Op && (rhs.text == "+" || rhs.text == "-")) {
                if (rhs.text == "-") rhs_sign = -rhs_sign;
                rhs = lex.next();
            }
            if (rhs.kind != Token::Number)
                throw std::runtime_error("lp parse: missing rhs in row " + row_name);
            model.add_row(row_name, std::move(coeffs), sense, rhs_sign * rhs.value - constant);
        }
        t = lex.next();
        section = lp::lowercase(t.text);
    }

    while (section != "end" && t.kind != Token::EndOfFile) {
        if (section == "bounds" || section == "bound") {
            while (true) {
                Token p = lex.peek();
                if (p.kind == Token::EndOfFile) break;
                if (p.kind == Token::Name && lp::is_section_keyword(lp::lowercase(p.text))) break;
                double lo = 0.0;
                bool have_lo = false;
                double sign = 1.0;
                Token tok = lex.next();
                while (tok.kind == Token::Op && (tok.text == "+" || tok.text == "-")) {
                    if (tok.text == "-") sign = -sign;
                    tok = lex.next();
                }
                if (tok.kind == Token::Number ||
                    (tok.kind == Token::Name && lp::lowercase(tok.text) == "inf")) {
                    lo = tok.kind == Token::Number ? sign * tok.value : sign * milp::kInf;
                    have_lo = true;
                    Token le = lex.next();
                    if (!(le.kind == Token::Op && (le.text == "<=" || le.text == "<")))
                        throw std::runtime_error("lp parse: malformed bound");
                    tok = lex.next();
                }
                if (tok.kind != Token::Name) throw std::runtime_error("lp parse: malformed bound");
                const int j = var_of(tok.text);
                if (have_lo) model.vars[j].lb = lo;
                Token nxt = lex.peek();
                if (nxt.kind == Token::Op && (nxt.text == "<=" || nxt.text == "<")) {
                    lex.next();
                    double s2 = 1.0;
                    Token ub = lex.next();
                    while (ub.kind == Token::Op && (ub.text == "+" || ub.text == "-")) {
                        if (ub.text == "-") s2 = -s2;
                        ub = lex.next();
                    }
                    if (ub.kind == Token::Name && lp::lowercase(ub.text) == "inf")
                        model.vars[j].ub = s2 * milp::kInf;
                    else if (ub.kind == Token::Number)
                        model.vars[j].ub = s2 * ub.value;
                    else
                        throw std::runtime_error("lp parse: malformed upper bound");
                } else if (nxt.kind == Token::Op && (nxt.text == ">=" || nxt.text == ">")) {
                    lex.next();
                    double s2 = 1.0;
                    Token lb = lex.next();
                    while (lb.kind == Token::Op && (lb.text == "+" || lb.text == "-")) {
                        if (lb.text == "-") s2 = -s2;
                        lb = lex.next();
                    }
                    model.vars[j].lb = s2 * lb.value;
                } else if (nxt.kind == Token::Op && nxt.text == "=") {
                    lex.next();
                    Token v = lex.next();
                    model.vars[j].lb = model.vars[j].ub = v.value;
                } else if (nxt.kind == Token::Name && lp::lowercase(nxt.text) == "free") {
                    lex.next();
                    model.vars[j].lb = -milp::kInf;
                    model.vars[j].ub = milp::kInf;
                }
            }
        } else if (section == "general" || section == "generals" || section == "gen" ||
                   section == "integer" || section == "integers") {
            while (true) {
                Token p = lex.peek();
                if (p.kind != Token::Name || lp::is_section_keyword(lp::lowercase(p.text))) break;
                model.vars[var_of(lex.next().text)].integer = true;
            }
        } else if (section == "binary" || section == "binaries" || section == "bin") {
            while (true) {
                Token p = lex.peek();
                if (p.kind != Token::Name || lp::is_section_keyword(lp::lowercase(p.text))) break;
                const int j = var_of(lex.next().text);
                model.vars[j].integer = true;
                model.vars[j].lb = std::max(model.vars[j].lb, 0.0);
                model.vars[j].ub = std::min(model.vars[j].ub, 1.0);
            }
        } else {
            throw std::runtime_error("lp parse: unknown section '" + t.text + "'");
        }
        t = lex.next();
        section = lp::lowercase(t.text);
    }
    return model;
}

inline milp::Model read_lp_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return read_lp(buf.str());
}

} // namespace mmwave
