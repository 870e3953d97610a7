#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace olympus::bank_detail {

size_t word_count(std::string_view text);
const std::vector<std::string>& chain_connectives();

}  // namespace olympus::bank_detail
