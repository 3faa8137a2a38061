#include "ame/io.hpp"

#include <fstream>
#include <sstream>

namespace ame {

namespace {

struct Line {
    std::size_t number;
    std::string text;
};

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw ParseError("line " + std::to_string(line) + ": " + what);
}

// content lines only: comments and blanks dropped, original numbering kept
std::vector<Line> content_lines(std::string_view text) {
    std::vector<Line> out;
    std::size_t number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        ++number;
        const std::size_t first = line.find_first_not_of(" \t\r");
        if (first != std::string_view::npos && line[first] != '#')
            out.push_back(Line{number, std::string(line)});
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return out;
}

std::vector<std::string> tokens(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string t;
    while (in >> t) out.push_back(t);
    return out;
}

std::uint64_t parse_u64(const std::string& s, std::size_t line) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        fail(line, "expected a non-negative integer, got '" + s + "'");
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        fail(line, "integer out of range: '" + s + "'");
    }
}

FieldSpec field_from_tokens(const std::vector<std::string>& tok, std::size_t line) {
    std::size_t i = 0;
    if (i < tok.size() && tok[i] == "field") ++i;
    if (i >= tok.size()) fail(line, "empty field description");
    const std::string kind = tok[i++];
    if (kind == "prime") {
        if (tok.size() != i + 1) fail(line, "expected 'field prime <p>'");
        return FieldSpec::prime(parse_u64(tok[i], line));
    }
    if (kind == "primepower") {
        if (tok.size() < i + 3)
            fail(line, "expected 'field primepower <p> <m> <c0> ... <cm>'");
        const std::uint64_t p = parse_u64(tok[i], line);
        const std::uint64_t m = parse_u64(tok[i + 1], line);
        std::vector<std::uint64_t> poly;
        for (std::size_t k = i + 2; k < tok.size(); ++k)
            poly.push_back(parse_u64(tok[k], line));
        return FieldSpec::prime_power(p, static_cast<unsigned>(m), std::move(poly));
    }
    if (kind == "composite") {
        std::vector<std::uint64_t> primes;
        for (std::size_t k = i; k < tok.size(); ++k) primes.push_back(parse_u64(tok[k], line));
        return FieldSpec::composite(std::move(primes));
    }
    fail(line, "unknown field kind '" + kind + "'");
}

} // namespace

std::string field_to_string(const FieldSpec& f) {
    std::ostringstream out;
    switch (f.kind()) {
    case FieldKind::Prime:
        out << "field prime " << f.cardinality();
        break;
    case FieldKind::PrimePower:
        out << "field primepower " << f.characteristic() << ' ' << f.degree();
        for (auto c : f.modulus()) out << ' ' << c;
        break;
    case FieldKind::CompositeSquareFree:
        out << "field composite";
        for (auto p : f.primes()) out << ' ' << p;
        break;
    }
    return out.str();
}

std::string matrix_to_string(const PhaseMatrix& p) {
    std::ostringstream out;
    out << "ame-phase v1\n";
    out << "N " << p.n_parties() << '\n';
    out << field_to_string(p.field()) << '\n';
    for (int i = 0; i < p.n_parties(); ++i) {
        for (int j = 0; j < p.n_parties(); ++j) {
            if (j) out << ' ';
            out << p.at(i, j);
        }
        out << '\n';
    }
    return out.str();
}

PhaseMatrix parse_matrix(std::string_view text) {
    const auto lines = content_lines(text);
    std::size_t idx = 0;
    auto next = [&]() -> const Line& {
        if (idx >= lines.size())
            throw ParseError("unexpected end of file after line " +
                             std::to_string(lines.empty() ? 0 : lines.back().number));
        return lines[idx++];
    };

    {
        const Line& header = next();
        if (tokens(header.text) != std::vector<std::string>{"ame-phase", "v1"})
            fail(header.number, "expected header 'ame-phase v1'");
    }

    const Line& nline = next();
    const auto ntok = tokens(nline.text);
    if (ntok.size() != 2 || ntok[0] != "N") fail(nline.number, "expected 'N <count>'");
    const std::uint64_t n = parse_u64(ntok[1], nline.number);
    if (n < 2 || n > 63) fail(nline.number, "party count must be in [2, 63]");

    const Line& fline = next();
    const auto ftok = tokens(fline.text);
    if (ftok.size() < 2 || ftok[0] != "field") fail(fline.number, "expected 'field ...'");
    FieldSpec field = FieldSpec::prime(2);
    try {
        field = field_from_tokens(ftok, fline.number);
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        fail(fline.number, e.what());
    }

    std::vector<FieldElement> entries;
    entries.reserve(n * n);
    for (std::uint64_t r = 0; r < n; ++r) {
        const Line& row = next();
        const auto rtok = tokens(row.text);
        if (rtok.size() != n)
            fail(row.number, "expected " + std::to_string(n) + " entries, got " +
                                 std::to_string(rtok.size()));
        for (const auto& t : rtok) {
            const std::uint64_t v = parse_u64(t, row.number);
            if (v >= field.cardinality())
                fail(row.number, "entry " + t + " not reduced modulo field cardinality " +
                                     std::to_string(field.cardinality()));
            entries.push_back(v);
        }
    }
    if (idx < lines.size()) fail(lines[idx].number, "unexpected trailing content");

    try {
        return PhaseMatrix::from_entries(static_cast<int>(n), std::move(field), entries);
    } catch (const Error& e) {
        throw ParseError(std::string("matrix validation failed: ") + e.what());
    }
}

FieldSpec field_from_string(std::string_view text) {
    return field_from_tokens(tokens(std::string(text)), 0);
}

void save_matrix(const PhaseMatrix& p, const std::string& path,
                 const std::string& manifest_json) {
    std::string body = matrix_to_string(p);
    if (!manifest_json.empty()) body += "# manifest " + manifest_json + "\n";
    write_file(path, body);
}

PhaseMatrix load_matrix(const std::string& path) {
    return parse_matrix(read_file(path));
}

CompositePhase load_composite(const std::string& path) {
    return split_to_composite(load_matrix(path));
}

std::optional<std::string> extract_manifest(std::string_view text) {
    const std::string_view tag = "# manifest ";
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        if (line.substr(0, tag.size()) == tag)
            return std::string(line.substr(tag.size()));
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return std::nullopt;
}

std::optional<std::string> extract_manifest_from_file(const std::string& path) {
    return extract_manifest(read_file(path));
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string digest_hex(std::string_view data) {
    static const char* hex = "0123456789abcdef";
    std::uint64_t h = fnv1a64(data);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = hex[h & 0xF];
        h >>= 4;
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write file: " + path);
    out << content;
    if (!out) throw ParseError("write failed: " + path);
}

} // namespace ame
