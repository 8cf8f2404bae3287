#pragma once

#include "boolean_function.hpp"
#include "gates.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace exsyn
{

inline std::vector<std::string> builtin_basis_names()
{
  return {"standard", "reversible", "comparator", "ite", "nand", "nor"};
}

inline basis builtin_basis( std::string const& name )
{
  basis b;
  b.name = name;
  if ( name == "standard" )
    b.functions = {gates::not_(), gates::and_(), gates::or_(), gates::xor_(), gates::impl(), gates::xnor_()};
  else if ( name == "reversible" )
    b.functions = {gates::fredkin(), gates::toffoli()};
  else if ( name == "comparator" )
    b.functions = {gates::cmp()};
  else if ( name == "ite" )
    b.functions = {gates::ite(), gates::constant( true ), gates::constant( false )};
  else if ( name == "nand" )
    b.functions = {gates::nand_()};
  else if ( name == "nor" )
    b.functions = {gates::nor_()};
  else
    throw std::invalid_argument( "unknown basis '" + name + "'" );
  return b;
}

/*! \brief Number of selector lines for a cell choosing among `n` functions. */
inline uint32_t selector_width( uint32_t n )
{
  uint32_t w = 0;
  while ( ( uint64_t( 1 ) << w ) < n )
    ++w;
  return w;
}

inline uint32_t selector_width( basis const& b ) { return selector_width( b.size() ); }

/*! \brief Parses `name m n hex...` lines (one hex table per output); `#` starts a comment. */
inline basis parse_basis( std::string const& text, std::string name = "custom" )
{
  basis b;
  b.name = std::move( name );
  std::istringstream in( text );
  std::string line;
  uint32_t lineno = 0;
  while ( std::getline( in, line ) )
  {
    ++lineno;
    if ( auto h = line.find( '#' ); h != std::string::npos )
      line = line.substr( 0, h );
    std::istringstream ls( line );
    std::string fname;
    if ( !( ls >> fname ) )
      continue;
    uint32_t m = 0, n = 0;
    if ( !( ls >> m >> n ) || n == 0u )
      throw std::invalid_argument( "basis line " + std::to_string( lineno ) + ": expected 'name m n hex'" );
    std::vector<std::string> tables;
    std::string t;
    while ( ls >> t )
      tables.push_back( t );
    if ( tables.size() != n )
      throw std::invalid_argument( "basis line " + std::to_string( lineno ) + ": expected " + std::to_string( n ) + " truth tables" );
    try
    {
      b.functions.push_back( boolean_function::from_hex( fname, m, tables ) );
    }
    catch ( std::invalid_argument const& e )
    {
      throw std::invalid_argument( "basis line " + std::to_string( lineno ) + ": " + e.what() );
    }
  }
  if ( b.functions.empty() )
    throw std::invalid_argument( "basis file defines no functions" );
  return b;
}

inline basis load_basis( std::string const& path )
{
  std::ifstream f( path );
  if ( !f )
    throw std::runtime_error( "cannot open " + path );
  std::stringstream ss;
  ss << f.rdbuf();
  auto name = path;
  if ( auto s = name.find_last_of( '/' ); s != std::string::npos )
    name = name.substr( s + 1u );
  if ( auto d = name.rfind( '.' ); d != std::string::npos )
    name = name.substr( 0, d );
  return parse_basis( ss.str(), name );
}

inline std::string serialize_basis( basis const& b )
{
  std::ostringstream os;
  for ( auto const& f : b.functions )
  {
    os << f.name() << ' ' << f.num_inputs() << ' ' << f.num_outputs();
    for ( auto o = 0u; o < f.num_outputs(); ++o )
      os << ' ' << f.to_hex( o );
    os << '\n';
  }
  return os.str();
}

/*! \brief Resolves a builtin name or a basis file path. */
inline basis basis_by_name_or_path( std::string const& spec )
{
  for ( auto const& n : builtin_basis_names() )
  {
    if ( n == spec )
      return builtin_basis( spec );
  }
  return load_basis( spec );
}

/*! \brief True if swapping inputs i and j leaves every output row unchanged. */
inline bool inputs_commute( boolean_function const& f, uint32_t i, uint32_t j )
{
  auto const m = f.num_inputs();
  for ( uint64_t r = 0; r < f.num_rows(); ++r )
  {
    auto const bi = boolean_function::input_bit( r, m, i );
    auto const bj = boolean_function::input_bit( r, m, j );
    if ( bi == bj )
      continue;
    auto const swapped = r ^ ( uint64_t( 1 ) << ( m - 1u - i ) ) ^ ( uint64_t( 1 ) << ( m - 1u - j ) );
    for ( auto o = 0u; o < f.num_outputs(); ++o )
    {
      if ( f.get( r, o ) != f.get( swapped, o ) )
        return false;
    }
  }
  return true;
}

/*! \brief Per function, the unordered slot pairs (i < j) whose swap preserves all outputs. */
using commutation_map = std::vector<std::vector<std::pair<uint32_t, uint32_t>>>;

inline std::vector<std::pair<uint32_t, uint32_t>> commuting_pairs( boolean_function const& f )
{
  std::vector<std::pair<uint32_t, uint32_t>> v;
  for ( auto i = 0u; i < f.num_inputs(); ++i )
  {
    for ( auto j = i + 1u; j < f.num_inputs(); ++j )
    {
      if ( inputs_commute( f, i, j ) )
        v.emplace_back( i, j );
    }
  }
  return v;
}

inline commutation_map commuting_input_pairs( basis const& b, uint32_t cap = 20u )
{
  commutation_map cm;
  for ( auto const& f : b.functions )
  {
    if ( f.num_inputs() > cap )
      throw std::invalid_argument( "function " + f.name() + " exceeds the evaluation cap" );
    cm.push_back( commuting_pairs( f ) );
  }
  return cm;
}

} // namespace exsyn
