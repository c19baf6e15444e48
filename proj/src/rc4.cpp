#include "ransomlab/rc4.hpp"

#include <utility>

#include "ransomlab/error.hpp"

namespace ransomlab {

Rc4State rc4_ksa(std::span<const std::uint8_t> key)
{
    if (key.empty())
        throw Error("empty key");

    Rc4State st;
    for (int i = 0; i < 256; ++i)
        st.s[i] = static_cast<std::uint8_t>(i);

    std::uint8_t j = 0;
    for (int i = 0; i < 256; ++i) {
        j = static_cast<std::uint8_t>(j + st.s[i] + key[i % key.size()]);
        std::swap(st.s[i], st.s[j]);
    }
    return st;
}

Bytes rc4_apply(const Rc4State& state, std::span<const std::uint8_t> data)
{
    Rc4State st = state; // keystream runs on a copy; caller's state stays put

    Bytes out;
    out.reserve(data.size());
    for (std::uint8_t c : data) {
        st.i = static_cast<std::uint8_t>(st.i + 1);
        st.j = static_cast<std::uint8_t>(st.j + st.s[st.i]);
        std::swap(st.s[st.i], st.s[st.j]);
        std::uint8_t k = st.s[static_cast<std::uint8_t>(st.s[st.i] + st.s[st.j])];
        out.push_back(c ^ k);
    }
    return out;
}

} // namespace ransomlab
