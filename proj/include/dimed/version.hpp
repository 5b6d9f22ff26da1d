#ifndef DIMED_VERSION_HPP
#define DIMED_VERSION_HPP

namespace dimed {

inline constexpr const char* kVersion = "0.1.0";

}

#endif  // DIMED_VERSION_HPP
