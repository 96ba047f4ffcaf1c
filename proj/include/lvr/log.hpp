#pragma once

#include <functional>
#include <string>

namespace lvr {

// Warnings go to stderr unless a sink is installed (tests capture them).
using WarningSink = std::function<void(const std::string&)>;

void set_warning_sink(WarningSink sink);
void log_warning(const std::string& message);

}  // namespace lvr
