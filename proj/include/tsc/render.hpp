#pragma once

#include <array>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsc/eval.hpp"

namespace tsc {

// Phase glyphs: '=' artery green, '~' artery yellow, '|' cross green,
// ':' cross yellow.
inline char phase_glyph(int phase) {
    static constexpr char glyphs[4] = {'=', '~', '|', ':'};
    return glyphs[phase];
}

inline int phase_from_glyph(char g) {
    switch (g) {
        case '=': return 0;
        case '~': return 1;
        case '|': return 2;
        case ':': return 3;
        default: throw std::invalid_argument("unknown phase glyph");
    }
}

// One text frame per step. Queue columns are fixed width (%3d), so frame
// geometry is independent of queue magnitudes up to 3 digits.
//
//   t=42
//   I1 =  E:  3 S:  0 W:  1 N:  2
//   I2 |  E: 12 S:  4 W:  0 N:  1
inline std::string render_frame(const TrajectoryStep& snap) {
    std::ostringstream os;
    os << "t=" << snap.step << "\n";
    for (std::size_t n = 0; n < snap.phases.size(); ++n) {
        char line[64];
        std::snprintf(line, sizeof line, "I%zu %c  E:%3d S:%3d W:%3d N:%3d", n + 1,
                      phase_glyph(snap.phases[n]), snap.queues[n][0], snap.queues[n][1],
                      snap.queues[n][2], snap.queues[n][3]);
        os << line << "\n";
    }
    return os.str();
}

inline std::string render_ascii(const Trajectory& traj, long first, long last) {
    if (first < 0 || last >= static_cast<long>(traj.size()) || first > last)
        throw std::out_of_range("render range out of bounds");
    std::string out;
    for (long t = first; t <= last; ++t) {
        out += render_frame(traj[static_cast<std::size_t>(t)]);
        out += "\n";
    }
    return out;
}

// Inverse of render_frame; used by tests to check the format round-trips.
inline TrajectoryStep parse_frame(const std::string& frame) {
    std::istringstream is(frame);
    std::string line;
    if (!std::getline(is, line) || line.rfind("t=", 0) != 0)
        throw std::invalid_argument("missing step header");
    TrajectoryStep snap;
    snap.step = std::stol(line.substr(2));
    while (std::getline(is, line)) {
        if (line.empty()) break;
        std::size_t idx;
        char glyph;
        std::array<int, 4> q{};
        if (std::sscanf(line.c_str(), "I%zu %c  E:%d S:%d W:%d N:%d", &idx, &glyph, &q[0], &q[1],
                        &q[2], &q[3]) != 6)
            throw std::invalid_argument("malformed intersection line");
        snap.phases.push_back(phase_from_glyph(glyph));
        snap.queues.push_back(q);
    }
    return snap;
}

}  // namespace tsc
