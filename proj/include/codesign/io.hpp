#pragma once

// Text formats: CSV fields, implementation vectors, and the graph description file.
//
// Graph file (version 1), one declaration per line, '#' starts a comment:
//
//   codesign-graph 1
//   poset P covers a<b a<c b<d c<d        finite; a lone token declares an isolated element
//   poset R real 2 lower 0 0              componentwise reals, optional lower bound
//   poset PR product P R                  product of earlier posets
//   poset Q opposite P
//   node v generator lipschitz:d4m2L2:seed3
//   node n fun PR res P [order componentwise]
//   item [0 1] <a, (1, 2)> ; b            implementation (optional), provided ; required
//   expensive v
//   edge (v.0) -> (n.1)                   resource coordinate 0 of v feeds functionality 1 of n
//
// Item lines belong to the closest preceding table node. Without an explicit
// implementation, item k is the one-coordinate point k.

#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "codesign/benchmarks.hpp"
#include "codesign/graph.hpp"

namespace codesign {

// ---- CSV ----------------------------------------------------------------------

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char c = line[k];
        if (quoted) {
            if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
                cur += '"';
                ++k;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw parse_error("unterminated quote in CSV line");
    out.push_back(std::move(cur));
    return out;
}

// ---- implementations --------------------------------------------------------

inline std::string format_impl(const Impl& i) {
    std::string s;
    for (std::size_t k = 0; k < i.size(); ++k) s += (k ? " " : "") + format_real(i[k]);
    return s;
}

inline Impl parse_impl(std::string_view s) {
    Impl out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(detail::parse_real(tok));
    return out;
}

// ---- graph files ------------------------------------------------------------

namespace detail {

inline std::vector<std::string> tokens(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    std::string t;
    while (in >> t) out.push_back(t);
    return out;
}

inline std::string poset_declaration(const PosetSpec& p, const std::map<const PosetSpec*, std::string>& names) {
    auto ref = [&](const Poset& q) { return names.at(q.get()); };
    std::ostringstream os;
    switch (p.kind()) {
        case PosetSpec::kind_t::real:
            os << "real " << p.dimension();
            if (p.lower()) {
                os << " lower";
                for (double v : *p.lower()) os << ' ' << format_real(v);
            }
            if (p.tolerance() > 0) os << " tolerance " << format_real(p.tolerance());
            break;
        case PosetSpec::kind_t::finite: {
            // Names first so the reader assigns the same element indices.
            os << "covers";
            for (const auto& n : p.names()) os << ' ' << n;
            for (auto [a, b] : p.covers()) os << ' ' << p.name(a) << '<' << p.name(b);
            break;
        }
        case PosetSpec::kind_t::product:
            os << "product";
            for (const auto& q : p.parts()) os << ' ' << ref(q);
            break;
        case PosetSpec::kind_t::opposite: os << "opposite " << ref(p.inner()); break;
    }
    return os.str();
}

}  // namespace detail

inline CoDesignGraph read_graph(std::istream& in) {
    CoDesignGraph g;
    std::map<std::string, Poset> posets;
    struct Table {
        std::string name;
        Poset fun, res;
        bool componentwise = false;
        std::vector<Impl> items;
        std::vector<std::pair<Element, Element>> rows;
    };
    std::vector<std::pair<std::size_t, Table>> tables;  // (slot in pending, table)
    std::vector<std::pair<std::string, std::optional<Dpi>>> pending;  // declaration order
    std::vector<std::optional<std::size_t>> table_of;   // per pending node
    std::optional<std::string> expensive;
    std::vector<std::string> edge_lines;
    std::size_t lineno = 0;
    bool header = false;
    static const std::regex edge_re(R"(^\s*edge\s+\(\s*([^.\s()]+)\.(\d+)\s*\)\s*->\s*\(\s*([^.\s()]+)\.(\d+)\s*\)\s*$)");

    auto fail = [&](const std::string& what) { throw parse_error("line " + std::to_string(lineno) + ": " + what); };
    auto poset = [&](const std::string& name) {
        auto it = posets.find(name);
        if (it == posets.end()) fail("unknown poset '" + name + "'");
        return it->second;
    };

    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto tok = detail::tokens(line);
        if (tok.empty()) continue;
        if (!header) {
            if (tok.size() != 2 || tok[0] != "codesign-graph") fail("expected 'codesign-graph 1'");
            if (tok[1] != "1") fail("unsupported graph file version " + tok[1]);
            header = true;
            continue;
        }
        const std::string& kw = tok[0];
        if (kw == "poset") {
            if (tok.size() < 3) fail("poset needs a name and a kind");
            if (posets.count(tok[1])) fail("poset '" + tok[1] + "' declared twice");
            const std::string& kind = tok[2];
            Poset p;
            if (kind == "real") {
                if (tok.size() < 4) fail("real poset needs a dimension");
                const std::size_t m = std::stoul(tok[3]);
                RealOptions o;
                for (std::size_t k = 4; k < tok.size();) {
                    if (tok[k] == "lower" && k + m < tok.size()) {
                        std::vector<double> lo;
                        for (std::size_t a = 1; a <= m; ++a) lo.push_back(detail::parse_real(tok[k + a]));
                        o.lower = lo;
                        k += m + 1;
                    } else if (tok[k] == "tolerance" && k + 1 < tok.size()) {
                        o.tolerance = detail::parse_real(tok[k + 1]);
                        k += 2;
                    } else {
                        fail("expected 'lower <m values>' or 'tolerance <t>'");
                    }
                }
                p = PosetSpec::real(m, o);
            } else if (kind == "covers") {
                std::ostringstream text;
                for (std::size_t k = 3; k < tok.size(); ++k) {
                    const auto lt = tok[k].find('<');
                    if (lt == std::string::npos)
                        text << tok[k] << '\n';
                    else
                        text << tok[k].substr(0, lt) << " < " << tok[k].substr(lt + 1) << '\n';
                }
                std::istringstream cover_in(text.str());
                p = parse_cover_list(cover_in);
            } else if (kind == "product") {
                std::vector<Poset> parts;
                for (std::size_t k = 3; k < tok.size(); ++k) parts.push_back(poset(tok[k]));
                p = PosetSpec::product(std::move(parts));
            } else if (kind == "opposite") {
                if (tok.size() != 4) fail("opposite takes one poset");
                p = PosetSpec::opposite(poset(tok[3]));
            } else {
                fail("unknown poset kind '" + kind + "'");
            }
            posets[tok[1]] = p;
        } else if (kw == "node") {
            if (tok.size() < 3) fail("node needs a name and a body");
            if (tok[2] == "generator") {
                if (tok.size() != 4) fail("generator node takes one instance id");
                pending.push_back({tok[1], instance_from_id(tok[3]).dpi});
                table_of.push_back(std::nullopt);
            } else {
                if (tok.size() < 6 || tok[2] != "fun" || tok[4] != "res") fail("expected 'node NAME fun F res R'");
                Table t{tok[1], poset(tok[3]), poset(tok[5]), false, {}, {}};
                if (tok.size() > 6) {
                    if (tok.size() != 8 || tok[6] != "order" || tok[7] != "componentwise")
                        fail("expected 'order componentwise'");
                    t.componentwise = true;
                }
                table_of.push_back(tables.size());
                tables.push_back({pending.size(), std::move(t)});
                pending.push_back({tok[1], std::nullopt});
            }
        } else if (kw == "item") {
            if (table_of.empty() || !table_of.back()) fail("item outside a table node");
            Table& t = tables[*table_of.back()].second;
            std::string body = line.substr(line.find("item") + 4);
            Impl impl{double(t.items.size())};
            const auto open = body.find('[');
            if (open != std::string::npos && detail::trim(body.substr(0, open)).empty()) {
                const auto close = body.find(']', open);
                if (close == std::string::npos) fail("unclosed implementation bracket");
                impl = parse_impl(body.substr(open + 1, close - open - 1));
                body = body.substr(close + 1);
            }
            const auto semi = body.find(';');
            if (semi == std::string::npos) fail("item needs 'provided ; required'");
            try {
                t.rows.push_back({parse_element(*t.fun, body.substr(0, semi)), parse_element(*t.res, body.substr(semi + 1))});
            } catch (const error& e) {
                fail(e.what());
            }
            t.items.push_back(std::move(impl));
        } else if (kw == "expensive") {
            if (tok.size() != 2) fail("expensive takes one node name");
            expensive = tok[1];
        } else if (kw == "edge") {
            edge_lines.push_back(std::to_string(lineno) + "\t" + line);
        } else {
            fail("unknown declaration '" + kw + "'");
        }
    }
    if (!header) throw parse_error("empty graph file");

    for (auto& [slot, t] : tables) {
        if (t.items.empty()) throw parse_error("table node '" + t.name + "' has no items");
        auto rows = std::make_shared<std::map<Impl, std::pair<Element, Element>>>();
        for (std::size_t k = 0; k < t.items.size(); ++k)
            if (!rows->emplace(t.items[k], t.rows[k]).second)
                throw parse_error("table node '" + t.name + "' repeats an implementation");
        SpaceOptions so;
        if (t.componentwise) so.order = PosetSpec::real(t.items[0].size());
        DpiModel m;
        m.space = ImplementationSpace::finite(t.items, std::move(so));
        m.fun = t.fun;
        m.res = t.res;
        m.prov = [rows](const Impl& i) { return rows->at(i).first; };
        m.req = [rows](const Impl& i) { return rows->at(i).second; };
        m.name = t.name;
        pending[slot].second = Dpi(std::move(m));
    }
    for (auto& [name, dpi] : pending) g.add_node(name, std::move(*dpi));
    if (expensive) g.set_expensive(*expensive);
    for (const auto& e : edge_lines) {
        const auto tab = e.find('\t');
        lineno = std::stoul(e.substr(0, tab));
        std::smatch m;
        const std::string body = e.substr(tab + 1);
        if (!std::regex_match(body, m, edge_re)) fail("expected 'edge (a.i) -> (b.j)'");
        if (!g.find(m[1]) || !g.find(m[3])) fail("edge names an unknown node");
        g.connect(m[1].str(), std::stoul(m[2]), m[3].str(), std::stoul(m[4]));
    }
    return g;
}

inline CoDesignGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open graph file '" + path + "'");
    return read_graph(in);
}

// Finite nodes are written as tables, others by their generator id (the design
// problem's name).
inline void write_graph(std::ostream& out, const CoDesignGraph& g) {
    out << "codesign-graph 1\n";
    std::map<const PosetSpec*, std::string> names;
    auto declare = [&](auto&& self, const Poset& p) -> std::string {
        if (auto it = names.find(p.get()); it != names.end()) return it->second;
        if (p->kind() == PosetSpec::kind_t::product)
            for (const auto& q : p->parts()) self(self, q);
        if (p->kind() == PosetSpec::kind_t::opposite) self(self, p->inner());
        const std::string name = "P" + std::to_string(names.size());
        out << "poset " << name << ' ' << detail::poset_declaration(*p, names) << '\n';
        names[p.get()] = name;
        return name;
    };
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Dpi& d = g.node(k);
        if (!d.space().is_finite()) {
            out << "node " << g.name(k) << " generator " << d.name() << '\n';
            continue;
        }
        const std::string f = declare(declare, d.fun_poset()), r = declare(declare, d.res_poset());
        out << "node " << g.name(k) << " fun " << f << " res " << r;
        if (d.space().has_point_order()) out << " order componentwise";
        out << '\n';
        for (const auto& i : d.space().items())
            out << "item [" << format_impl(i) << "] " << format_element(*d.fun_poset(), d.prov(i)) << " ; "
                << format_element(*d.res_poset(), d.req(i)) << '\n';
    }
    if (g.expensive_id()) out << "expensive " << g.name(*g.expensive_id()) << '\n';
    for (const Edge& e : g.edges())
        out << "edge (" << g.name(e.from.node) << '.' << e.from.coord << ") -> (" << g.name(e.to.node) << '.'
            << e.to.coord << ")\n";
}

inline void save_graph(const std::string& path, const CoDesignGraph& g) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot write graph file '" + path + "'");
    write_graph(out, g);
}

}  // namespace codesign
