#pragma once

// Small text helpers shared by the parsers and serializers.

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace relusnc::detail {

inline std::string_view trim( std::string_view text )
{
    const char *ws = " \t\r\n";
    auto first = text.find_first_not_of( ws );
    if ( first == std::string_view::npos )
        return {};
    auto last = text.find_last_not_of( ws );
    return text.substr( first, last - first + 1 );
}

inline std::vector<std::string_view> split( std::string_view text, char separator )
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while ( true )
    {
        auto end = text.find( separator, start );
        if ( end == std::string_view::npos )
        {
            parts.push_back( text.substr( start ) );
            return parts;
        }
        parts.push_back( text.substr( start, end - start ) );
        start = end + 1;
    }
}

inline std::vector<std::string_view> split_ws( std::string_view text )
{
    std::vector<std::string_view> parts;
    std::size_t i = 0;
    while ( i < text.size() )
    {
        while ( i < text.size() && ( text[i] == ' ' || text[i] == '\t' || text[i] == '\r' ) )
            ++i;
        std::size_t start = i;
        while ( i < text.size() && text[i] != ' ' && text[i] != '\t' && text[i] != '\r' )
            ++i;
        if ( i > start )
            parts.push_back( text.substr( start, i - start ) );
    }
    return parts;
}

// Whole-token double parse; accepts a leading '+', "inf" and "-inf".
inline std::optional<double> parse_double( std::string_view token )
{
    if ( !token.empty() && token.front() == '+' )
        token.remove_prefix( 1 );
    if ( token.empty() )
        return std::nullopt;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars( token.data(), token.data() + token.size(), value );
    if ( ec != std::errc() || ptr != token.data() + token.size() )
        return std::nullopt;
    return value;
}

inline std::optional<std::size_t> parse_size( std::string_view token )
{
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars( token.data(), token.data() + token.size(), value );
    if ( ec != std::errc() || ptr != token.data() + token.size() || token.empty() )
        return std::nullopt;
    return value;
}

// Shortest representation that parses back to the same double.
inline std::string format_double( double value )
{
    char buffer[64];
    auto [ptr, ec] = std::to_chars( buffer, buffer + sizeof( buffer ), value );
    return std::string( buffer, ptr );
}

} // namespace relusnc::detail
