#pragma once

namespace sparse_select {

inline constexpr const char* version_string = "0.1.0";

}  // namespace sparse_select
