#pragma once

#include <cstdio>
#include <initializer_list>
#include <ostream>

namespace shockline::csv {

// RFC 4180: comma separated, CRLF line endings, header row first.

inline void header(std::ostream& out, std::initializer_list<const char*> names) {
    bool first = true;
    for (const char* n : names) {
        if (!first) out << ',';
        out << n;
        first = false;
    }
    out << "\r\n";
}

inline void row(std::ostream& out, std::initializer_list<double> values) {
    char buf[32];
    bool first = true;
    for (double v : values) {
        if (!first) out << ',';
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
        first = false;
    }
    out << "\r\n";
}

}  // namespace shockline::csv
