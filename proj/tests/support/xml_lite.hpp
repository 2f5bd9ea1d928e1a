#pragma once

#include <cctype>
#include <map>
#include <string>
#include <vector>

// Minimal XML well-formedness scanner for structural assertions on SVG
// output: tag nesting, element counts, and character data. Not a general
// parser; entities are left unexpanded and DOCTYPEs are not supported.
namespace uq::test {

struct XmlStats {
    bool well_formed = false;
    std::map<std::string, std::size_t> counts;
    std::vector<std::string> texts;

    std::size_t count(const std::string& name) const {
        const auto it = counts.find(name);
        return it == counts.end() ? 0 : it->second;
    }
};

inline XmlStats scan_xml(const std::string& doc) {
    XmlStats stats;
    std::vector<std::string> stack;
    std::size_t roots = 0;
    std::string text;
    std::size_t pos = 0;
    const std::size_t n = doc.size();

    const auto flush_text = [&] {
        std::size_t a = 0;
        std::size_t b = text.size();
        while (a < b && std::isspace(static_cast<unsigned char>(text[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(text[b - 1]))) --b;
        if (b > a) {
            if (stack.empty()) return false;  // non-whitespace outside the root
            stats.texts.push_back(text.substr(a, b - a));
        }
        text.clear();
        return true;
    };
    const auto is_name_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' ||
               c == '.';
    };

    while (pos < n) {
        const char c = doc[pos];
        if (c != '<') {
            text += c;
            ++pos;
            continue;
        }
        if (!flush_text()) return stats;

        if (doc.compare(pos, 2, "<?") == 0) {
            const std::size_t end = doc.find("?>", pos);
            if (end == std::string::npos) return stats;
            pos = end + 2;
            continue;
        }
        if (doc.compare(pos, 4, "<!--") == 0) {
            const std::size_t end = doc.find("-->", pos);
            if (end == std::string::npos) return stats;
            pos = end + 3;
            continue;
        }

        ++pos;  // past '<'
        const bool closing = pos < n && doc[pos] == '/';
        if (closing) ++pos;

        std::string name;
        while (pos < n && is_name_char(doc[pos])) name += doc[pos++];
        if (name.empty()) return stats;

        if (closing) {
            while (pos < n && std::isspace(static_cast<unsigned char>(doc[pos]))) ++pos;
            if (pos >= n || doc[pos] != '>') return stats;
            ++pos;
            if (stack.empty() || stack.back() != name) return stats;
            stack.pop_back();
            continue;
        }

        bool self_closing = false;
        while (true) {
            while (pos < n && std::isspace(static_cast<unsigned char>(doc[pos]))) ++pos;
            if (pos >= n) return stats;
            if (doc[pos] == '>') {
                ++pos;
                break;
            }
            if (doc[pos] == '/') {
                ++pos;
                if (pos >= n || doc[pos] != '>') return stats;
                ++pos;
                self_closing = true;
                break;
            }
            std::string attr;
            while (pos < n && is_name_char(doc[pos])) attr += doc[pos++];
            if (attr.empty()) return stats;
            while (pos < n && std::isspace(static_cast<unsigned char>(doc[pos]))) ++pos;
            if (pos >= n || doc[pos] != '=') return stats;
            ++pos;
            while (pos < n && std::isspace(static_cast<unsigned char>(doc[pos]))) ++pos;
            if (pos >= n || (doc[pos] != '"' && doc[pos] != '\'')) return stats;
            const char quote = doc[pos++];
            const std::size_t end = doc.find(quote, pos);
            if (end == std::string::npos) return stats;
            pos = end + 1;
        }

        if (stack.empty()) {
            ++roots;
            if (roots > 1) return stats;
        }
        ++stats.counts[name];
        if (!self_closing) stack.push_back(name);
    }

    if (!flush_text()) return stats;
    stats.well_formed = stack.empty() && roots == 1;
    return stats;
}

}  // namespace uq::test
