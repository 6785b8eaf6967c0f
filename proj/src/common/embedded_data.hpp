#pragma once

#include <string_view>

// Contents of the files under data/, compiled in at configure time.
namespace phototopic::detail {

std::string_view embedded_topic_names();
std::string_view embedded_category_registry();

}  // namespace phototopic::detail
