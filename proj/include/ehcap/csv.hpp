#ifndef EHCAP_CSV_HPP
#define EHCAP_CSV_HPP

#include <cstdio>
#include <ostream>
#include <string>

namespace ehcap {

// 9 significant digits, locale-independent
inline std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

// single header line, comma separated, no quoting
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    CsvWriter& field(double v) { return raw(format_g9(v)); }
    CsvWriter& field(long long v) { return raw(std::to_string(v)); }
    CsvWriter& field(int v) { return raw(std::to_string(v)); }
    CsvWriter& field(const std::string& v) { return raw(v); }

    void endrow() {
        out_ << '\n';
        first_ = true;
    }

private:
    CsvWriter& raw(const std::string& s) {
        if (!first_) out_ << ',';
        out_ << s;
        first_ = false;
        return *this;
    }

    std::ostream& out_;
    bool first_ = true;
};

} // namespace ehcap

#endif
