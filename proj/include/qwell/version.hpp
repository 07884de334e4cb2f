#ifndef QWELL_VERSION_HPP
#define QWELL_VERSION_HPP

namespace qwell {

inline constexpr const char* version_string = "qwell 0.1.0";

}

#endif
