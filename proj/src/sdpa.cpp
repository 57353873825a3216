#include <cmath>
#include <sstream>

#include "mosb/solver.hpp"

namespace mosb {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;

void emit(std::ostringstream& os, int matno, int blk, int i, int j, double v) {
    if (v == 0.0) return;
    os << matno << " " << blk << " " << i << " " << j << " ";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf << "\n";
}
}  // namespace

std::string export_sdpa(const ConicProgram& prog) {
    detail::StdForm f = detail::lower_program(prog);
    const int nb = static_cast<int>(f.psd.size());
    const int m = static_cast<int>(f.rows.size());
    const bool has_lp = f.nl > 0;
    const int nblocks = nb + (has_lp ? 1 : 0);
    const int lp_block = nb + 1;

    // The file encodes the standard-form pair; this program sits on the dual
    // side (max tr(F0 Y) s.t. tr(Fi Y) = c_i, Y >= 0), so the program value is
    // -obj_sign times the optimum reported for the file.
    std::ostringstream os;
    os << "* mosb block conic program, SDPA sparse format\n";
    os << "* sense: " << (prog.sense == Sense::Minimize ? "minimize" : "maximize") << "\n";
    os << "* program objective = " << (f.obj_sign > 0 ? "-1" : "+1")
       << " * (optimal value of this file's maximization side)\n";
    os << m << "\n";
    os << nblocks << "\n";
    for (int k = 0; k < nb; ++k) os << f.psd[k] << (k + 1 < nblocks ? " " : "");
    if (has_lp) os << -f.nl;
    os << "\n";
    for (int r = 0; r < m; ++r) os << f.b[r] << (r + 1 < m ? " " : "");
    os << "\n";

    auto coord_entry = [&](std::ostringstream& o, int matno, int coord, double val) {
        if (coord < f.nl) {
            emit(o, matno, lp_block, coord + 1, coord + 1, val);
            return;
        }
        for (int k = nb - 1; k >= 0; --k) {
            if (coord >= f.psd_offset[k]) {
                int e = coord - f.psd_offset[k];
                int s = f.psd[k];
                // invert the upper-triangle index
                int p = 0;
                while (e >= s - p) {
                    e -= s - p;
                    ++p;
                }
                int q = p + e;
                emit(o, matno, k + 1, p + 1, q + 1, p == q ? val : val / kSqrt2);
                return;
            }
        }
    };

    // F0 = -c (dual side maximizes tr(F0 Y), our form minimizes c.x).
    for (int k = 0; k < f.dim; ++k)
        if (f.c[k] != 0.0) coord_entry(os, 0, k, -f.c[k]);
    for (int r = 0; r < m; ++r)
        for (const auto& [k, v] : f.rows[r]) coord_entry(os, r + 1, k, v);
    return os.str();
}

}  // namespace mosb
