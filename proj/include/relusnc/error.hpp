#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace relusnc {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Caller broke an operation's documented precondition.
class PreconditionError : public Error
{
public:
    using Error::Error;
};

class ParseError : public Error
{
public:
    ParseError( const std::string &source, std::size_t line, const std::string &message )
        : Error( source + ":" + std::to_string( line ) + ": " + message )
        , _line( line )
    {
    }

    std::size_t line() const { return _line; }

private:
    std::size_t _line;
};

// Internal solver failure (iteration cap, numerical breakdown, worker crash).
// Never to be read as an UNSAT answer.
class EngineError : public Error
{
public:
    using Error::Error;
};

} // namespace relusnc
