// Unicode 13.0.0 general-category ranges, generated from the UCD.

#include "miniens/text/unicode_categories.hpp"

#include <iterator>

namespace miniens::text {
namespace {

struct CodepointRange { char32_t lo; char32_t hi; };

constexpr CodepointRange kPunctuation[] = {
    {0x000021, 0x000023}, {0x000025, 0x00002A}, {0x00002C, 0x00002F}, {0x00003A, 0x00003B},
    {0x00003F, 0x000040}, {0x00005B, 0x00005D}, {0x00005F, 0x00005F}, {0x00007B, 0x00007B},
    {0x00007D, 0x00007D}, {0x0000A1, 0x0000A1}, {0x0000A7, 0x0000A7}, {0x0000AB, 0x0000AB},
    {0x0000B6, 0x0000B7}, {0x0000BB, 0x0000BB}, {0x0000BF, 0x0000BF}, {0x00037E, 0x00037E},
    {0x000387, 0x000387}, {0x00055A, 0x00055F}, {0x000589, 0x00058A}, {0x0005BE, 0x0005BE},
    {0x0005C0, 0x0005C0}, {0x0005C3, 0x0005C3}, {0x0005C6, 0x0005C6}, {0x0005F3, 0x0005F4},
    {0x000609, 0x00060A}, {0x00060C, 0x00060D}, {0x00061B, 0x00061B}, {0x00061E, 0x00061F},
    {0x00066A, 0x00066D}, {0x0006D4, 0x0006D4}, {0x000700, 0x00070D}, {0x0007F7, 0x0007F9},
    {0x000830, 0x00083E}, {0x00085E, 0x00085E}, {0x000964, 0x000965}, {0x000970, 0x000970},
    {0x0009FD, 0x0009FD}, {0x000A76, 0x000A76}, {0x000AF0, 0x000AF0}, {0x000C77, 0x000C77},
    {0x000C84, 0x000C84}, {0x000DF4, 0x000DF4}, {0x000E4F, 0x000E4F}, {0x000E5A, 0x000E5B},
    {0x000F04, 0x000F12}, {0x000F14, 0x000F14}, {0x000F3A, 0x000F3D}, {0x000F85, 0x000F85},
    {0x000FD0, 0x000FD4}, {0x000FD9, 0x000FDA}, {0x00104A, 0x00104F}, {0x0010FB, 0x0010FB},
    {0x001360, 0x001368}, {0x001400, 0x001400}, {0x00166E, 0x00166E}, {0x00169B, 0x00169C},
    {0x0016EB, 0x0016ED}, {0x001735, 0x001736}, {0x0017D4, 0x0017D6}, {0x0017D8, 0x0017DA},
    {0x001800, 0x00180A}, {0x001944, 0x001945}, {0x001A1E, 0x001A1F}, {0x001AA0, 0x001AA6},
    {0x001AA8, 0x001AAD}, {0x001B5A, 0x001B60}, {0x001BFC, 0x001BFF}, {0x001C3B, 0x001C3F},
    {0x001C7E, 0x001C7F}, {0x001CC0, 0x001CC7}, {0x001CD3, 0x001CD3}, {0x002010, 0x002027},
    {0x002030, 0x002043}, {0x002045, 0x002051}, {0x002053, 0x00205E}, {0x00207D, 0x00207E},
    {0x00208D, 0x00208E}, {0x002308, 0x00230B}, {0x002329, 0x00232A}, {0x002768, 0x002775},
    {0x0027C5, 0x0027C6}, {0x0027E6, 0x0027EF}, {0x002983, 0x002998}, {0x0029D8, 0x0029DB},
    {0x0029FC, 0x0029FD}, {0x002CF9, 0x002CFC}, {0x002CFE, 0x002CFF}, {0x002D70, 0x002D70},
    {0x002E00, 0x002E2E}, {0x002E30, 0x002E4F}, {0x002E52, 0x002E52}, {0x003001, 0x003003},
    {0x003008, 0x003011}, {0x003014, 0x00301F}, {0x003030, 0x003030}, {0x00303D, 0x00303D},
    {0x0030A0, 0x0030A0}, {0x0030FB, 0x0030FB}, {0x00A4FE, 0x00A4FF}, {0x00A60D, 0x00A60F},
    {0x00A673, 0x00A673}, {0x00A67E, 0x00A67E}, {0x00A6F2, 0x00A6F7}, {0x00A874, 0x00A877},
    {0x00A8CE, 0x00A8CF}, {0x00A8F8, 0x00A8FA}, {0x00A8FC, 0x00A8FC}, {0x00A92E, 0x00A92F},
    {0x00A95F, 0x00A95F}, {0x00A9C1, 0x00A9CD}, {0x00A9DE, 0x00A9DF}, {0x00AA5C, 0x00AA5F},
    {0x00AADE, 0x00AADF}, {0x00AAF0, 0x00AAF1}, {0x00ABEB, 0x00ABEB}, {0x00FD3E, 0x00FD3F},
    {0x00FE10, 0x00FE19}, {0x00FE30, 0x00FE52}, {0x00FE54, 0x00FE61}, {0x00FE63, 0x00FE63},
    {0x00FE68, 0x00FE68}, {0x00FE6A, 0x00FE6B}, {0x00FF01, 0x00FF03}, {0x00FF05, 0x00FF0A},
    {0x00FF0C, 0x00FF0F}, {0x00FF1A, 0x00FF1B}, {0x00FF1F, 0x00FF20}, {0x00FF3B, 0x00FF3D},
    {0x00FF3F, 0x00FF3F}, {0x00FF5B, 0x00FF5B}, {0x00FF5D, 0x00FF5D}, {0x00FF5F, 0x00FF65},
    {0x010100, 0x010102}, {0x01039F, 0x01039F}, {0x0103D0, 0x0103D0}, {0x01056F, 0x01056F},
    {0x010857, 0x010857}, {0x01091F, 0x01091F}, {0x01093F, 0x01093F}, {0x010A50, 0x010A58},
    {0x010A7F, 0x010A7F}, {0x010AF0, 0x010AF6}, {0x010B39, 0x010B3F}, {0x010B99, 0x010B9C},
    {0x010EAD, 0x010EAD}, {0x010F55, 0x010F59}, {0x011047, 0x01104D}, {0x0110BB, 0x0110BC},
    {0x0110BE, 0x0110C1}, {0x011140, 0x011143}, {0x011174, 0x011175}, {0x0111C5, 0x0111C8},
    {0x0111CD, 0x0111CD}, {0x0111DB, 0x0111DB}, {0x0111DD, 0x0111DF}, {0x011238, 0x01123D},
    {0x0112A9, 0x0112A9}, {0x01144B, 0x01144F}, {0x01145A, 0x01145B}, {0x01145D, 0x01145D},
    {0x0114C6, 0x0114C6}, {0x0115C1, 0x0115D7}, {0x011641, 0x011643}, {0x011660, 0x01166C},
    {0x01173C, 0x01173E}, {0x01183B, 0x01183B}, {0x011944, 0x011946}, {0x0119E2, 0x0119E2},
    {0x011A3F, 0x011A46}, {0x011A9A, 0x011A9C}, {0x011A9E, 0x011AA2}, {0x011C41, 0x011C45},
    {0x011C70, 0x011C71}, {0x011EF7, 0x011EF8}, {0x011FFF, 0x011FFF}, {0x012470, 0x012474},
    {0x016A6E, 0x016A6F}, {0x016AF5, 0x016AF5}, {0x016B37, 0x016B3B}, {0x016B44, 0x016B44},
    {0x016E97, 0x016E9A}, {0x016FE2, 0x016FE2}, {0x01BC9F, 0x01BC9F}, {0x01DA87, 0x01DA8B},
    {0x01E95E, 0x01E95F},
};

constexpr CodepointRange kSymbol[] = {
    {0x000024, 0x000024}, {0x00002B, 0x00002B}, {0x00003C, 0x00003E}, {0x00005E, 0x00005E},
    {0x000060, 0x000060}, {0x00007C, 0x00007C}, {0x00007E, 0x00007E}, {0x0000A2, 0x0000A6},
    {0x0000A8, 0x0000A9}, {0x0000AC, 0x0000AC}, {0x0000AE, 0x0000B1}, {0x0000B4, 0x0000B4},
    {0x0000B8, 0x0000B8}, {0x0000D7, 0x0000D7}, {0x0000F7, 0x0000F7}, {0x0002C2, 0x0002C5},
    {0x0002D2, 0x0002DF}, {0x0002E5, 0x0002EB}, {0x0002ED, 0x0002ED}, {0x0002EF, 0x0002FF},
    {0x000375, 0x000375}, {0x000384, 0x000385}, {0x0003F6, 0x0003F6}, {0x000482, 0x000482},
    {0x00058D, 0x00058F}, {0x000606, 0x000608}, {0x00060B, 0x00060B}, {0x00060E, 0x00060F},
    {0x0006DE, 0x0006DE}, {0x0006E9, 0x0006E9}, {0x0006FD, 0x0006FE}, {0x0007F6, 0x0007F6},
    {0x0007FE, 0x0007FF}, {0x0009F2, 0x0009F3}, {0x0009FA, 0x0009FB}, {0x000AF1, 0x000AF1},
    {0x000B70, 0x000B70}, {0x000BF3, 0x000BFA}, {0x000C7F, 0x000C7F}, {0x000D4F, 0x000D4F},
    {0x000D79, 0x000D79}, {0x000E3F, 0x000E3F}, {0x000F01, 0x000F03}, {0x000F13, 0x000F13},
    {0x000F15, 0x000F17}, {0x000F1A, 0x000F1F}, {0x000F34, 0x000F34}, {0x000F36, 0x000F36},
    {0x000F38, 0x000F38}, {0x000FBE, 0x000FC5}, {0x000FC7, 0x000FCC}, {0x000FCE, 0x000FCF},
    {0x000FD5, 0x000FD8}, {0x00109E, 0x00109F}, {0x001390, 0x001399}, {0x00166D, 0x00166D},
    {0x0017DB, 0x0017DB}, {0x001940, 0x001940}, {0x0019DE, 0x0019FF}, {0x001B61, 0x001B6A},
    {0x001B74, 0x001B7C}, {0x001FBD, 0x001FBD}, {0x001FBF, 0x001FC1}, {0x001FCD, 0x001FCF},
    {0x001FDD, 0x001FDF}, {0x001FED, 0x001FEF}, {0x001FFD, 0x001FFE}, {0x002044, 0x002044},
    {0x002052, 0x002052}, {0x00207A, 0x00207C}, {0x00208A, 0x00208C}, {0x0020A0, 0x0020BF},
    {0x002100, 0x002101}, {0x002103, 0x002106}, {0x002108, 0x002109}, {0x002114, 0x002114},
    {0x002116, 0x002118}, {0x00211E, 0x002123}, {0x002125, 0x002125}, {0x002127, 0x002127},
    {0x002129, 0x002129}, {0x00212E, 0x00212E}, {0x00213A, 0x00213B}, {0x002140, 0x002144},
    {0x00214A, 0x00214D}, {0x00214F, 0x00214F}, {0x00218A, 0x00218B}, {0x002190, 0x002307},
    {0x00230C, 0x002328}, {0x00232B, 0x002426}, {0x002440, 0x00244A}, {0x00249C, 0x0024E9},
    {0x002500, 0x002767}, {0x002794, 0x0027C4}, {0x0027C7, 0x0027E5}, {0x0027F0, 0x002982},
    {0x002999, 0x0029D7}, {0x0029DC, 0x0029FB}, {0x0029FE, 0x002B73}, {0x002B76, 0x002B95},
    {0x002B97, 0x002BFF}, {0x002CE5, 0x002CEA}, {0x002E50, 0x002E51}, {0x002E80, 0x002E99},
    {0x002E9B, 0x002EF3}, {0x002F00, 0x002FD5}, {0x002FF0, 0x002FFB}, {0x003004, 0x003004},
    {0x003012, 0x003013}, {0x003020, 0x003020}, {0x003036, 0x003037}, {0x00303E, 0x00303F},
    {0x00309B, 0x00309C}, {0x003190, 0x003191}, {0x003196, 0x00319F}, {0x0031C0, 0x0031E3},
    {0x003200, 0x00321E}, {0x00322A, 0x003247}, {0x003250, 0x003250}, {0x003260, 0x00327F},
    {0x00328A, 0x0032B0}, {0x0032C0, 0x0033FF}, {0x004DC0, 0x004DFF}, {0x00A490, 0x00A4C6},
    {0x00A700, 0x00A716}, {0x00A720, 0x00A721}, {0x00A789, 0x00A78A}, {0x00A828, 0x00A82B},
    {0x00A836, 0x00A839}, {0x00AA77, 0x00AA79}, {0x00AB5B, 0x00AB5B}, {0x00AB6A, 0x00AB6B},
    {0x00FB29, 0x00FB29}, {0x00FBB2, 0x00FBC1}, {0x00FDFC, 0x00FDFD}, {0x00FE62, 0x00FE62},
    {0x00FE64, 0x00FE66}, {0x00FE69, 0x00FE69}, {0x00FF04, 0x00FF04}, {0x00FF0B, 0x00FF0B},
    {0x00FF1C, 0x00FF1E}, {0x00FF3E, 0x00FF3E}, {0x00FF40, 0x00FF40}, {0x00FF5C, 0x00FF5C},
    {0x00FF5E, 0x00FF5E}, {0x00FFE0, 0x00FFE6}, {0x00FFE8, 0x00FFEE}, {0x00FFFC, 0x00FFFD},
    {0x010137, 0x01013F}, {0x010179, 0x010189}, {0x01018C, 0x01018E}, {0x010190, 0x01019C},
    {0x0101A0, 0x0101A0}, {0x0101D0, 0x0101FC}, {0x010877, 0x010878}, {0x010AC8, 0x010AC8},
    {0x01173F, 0x01173F}, {0x011FD5, 0x011FF1}, {0x016B3C, 0x016B3F}, {0x016B45, 0x016B45},
    {0x01BC9C, 0x01BC9C}, {0x01D000, 0x01D0F5}, {0x01D100, 0x01D126}, {0x01D129, 0x01D164},
    {0x01D16A, 0x01D16C}, {0x01D183, 0x01D184}, {0x01D18C, 0x01D1A9}, {0x01D1AE, 0x01D1E8},
    {0x01D200, 0x01D241}, {0x01D245, 0x01D245}, {0x01D300, 0x01D356}, {0x01D6C1, 0x01D6C1},
    {0x01D6DB, 0x01D6DB}, {0x01D6FB, 0x01D6FB}, {0x01D715, 0x01D715}, {0x01D735, 0x01D735},
    {0x01D74F, 0x01D74F}, {0x01D76F, 0x01D76F}, {0x01D789, 0x01D789}, {0x01D7A9, 0x01D7A9},
    {0x01D7C3, 0x01D7C3}, {0x01D800, 0x01D9FF}, {0x01DA37, 0x01DA3A}, {0x01DA6D, 0x01DA74},
    {0x01DA76, 0x01DA83}, {0x01DA85, 0x01DA86}, {0x01E14F, 0x01E14F}, {0x01E2FF, 0x01E2FF},
    {0x01ECAC, 0x01ECAC}, {0x01ECB0, 0x01ECB0}, {0x01ED2E, 0x01ED2E}, {0x01EEF0, 0x01EEF1},
    {0x01F000, 0x01F02B}, {0x01F030, 0x01F093}, {0x01F0A0, 0x01F0AE}, {0x01F0B1, 0x01F0BF},
    {0x01F0C1, 0x01F0CF}, {0x01F0D1, 0x01F0F5}, {0x01F10D, 0x01F1AD}, {0x01F1E6, 0x01F202},
    {0x01F210, 0x01F23B}, {0x01F240, 0x01F248}, {0x01F250, 0x01F251}, {0x01F260, 0x01F265},
    {0x01F300, 0x01F6D7}, {0x01F6E0, 0x01F6EC}, {0x01F6F0, 0x01F6FC}, {0x01F700, 0x01F773},
    {0x01F780, 0x01F7D8}, {0x01F7E0, 0x01F7EB}, {0x01F800, 0x01F80B}, {0x01F810, 0x01F847},
    {0x01F850, 0x01F859}, {0x01F860, 0x01F887}, {0x01F890, 0x01F8AD}, {0x01F8B0, 0x01F8B1},
    {0x01F900, 0x01F978}, {0x01F97A, 0x01F9CB}, {0x01F9CD, 0x01FA53}, {0x01FA60, 0x01FA6D},
    {0x01FA70, 0x01FA74}, {0x01FA78, 0x01FA7A}, {0x01FA80, 0x01FA86}, {0x01FA90, 0x01FAA8},
    {0x01FAB0, 0x01FAB6}, {0x01FAC0, 0x01FAC2}, {0x01FAD0, 0x01FAD6}, {0x01FB00, 0x01FB92},
    {0x01FB94, 0x01FBCA},
};

constexpr CodepointRange kLetter[] = {
    {0x000041, 0x00005A}, {0x000061, 0x00007A}, {0x0000AA, 0x0000AA}, {0x0000B5, 0x0000B5},
    {0x0000BA, 0x0000BA}, {0x0000C0, 0x0000D6}, {0x0000D8, 0x0000F6}, {0x0000F8, 0x0002C1},
    {0x0002C6, 0x0002D1}, {0x0002E0, 0x0002E4}, {0x0002EC, 0x0002EC}, {0x0002EE, 0x0002EE},
    {0x000370, 0x000374}, {0x000376, 0x000377}, {0x00037A, 0x00037D}, {0x00037F, 0x00037F},
    {0x000386, 0x000386}, {0x000388, 0x00038A}, {0x00038C, 0x00038C}, {0x00038E, 0x0003A1},
    {0x0003A3, 0x0003F5}, {0x0003F7, 0x000481}, {0x00048A, 0x00052F}, {0x000531, 0x000556},
    {0x000559, 0x000559}, {0x000560, 0x000588}, {0x0005D0, 0x0005EA}, {0x0005EF, 0x0005F2},
    {0x000620, 0x00064A}, {0x00066E, 0x00066F}, {0x000671, 0x0006D3}, {0x0006D5, 0x0006D5},
    {0x0006E5, 0x0006E6}, {0x0006EE, 0x0006EF}, {0x0006FA, 0x0006FC}, {0x0006FF, 0x0006FF},
    {0x000710, 0x000710}, {0x000712, 0x00072F}, {0x00074D, 0x0007A5}, {0x0007B1, 0x0007B1},
    {0x0007CA, 0x0007EA}, {0x0007F4, 0x0007F5}, {0x0007FA, 0x0007FA}, {0x000800, 0x000815},
    {0x00081A, 0x00081A}, {0x000824, 0x000824}, {0x000828, 0x000828}, {0x000840, 0x000858},
    {0x000860, 0x00086A}, {0x0008A0, 0x0008B4}, {0x0008B6, 0x0008C7}, {0x000904, 0x000939},
    {0x00093D, 0x00093D}, {0x000950, 0x000950}, {0x000958, 0x000961}, {0x000971, 0x000980},
    {0x000985, 0x00098C}, {0x00098F, 0x000990}, {0x000993, 0x0009A8}, {0x0009AA, 0x0009B0},
    {0x0009B2, 0x0009B2}, {0x0009B6, 0x0009B9}, {0x0009BD, 0x0009BD}, {0x0009CE, 0x0009CE},
    {0x0009DC, 0x0009DD}, {0x0009DF, 0x0009E1}, {0x0009F0, 0x0009F1}, {0x0009FC, 0x0009FC},
    {0x000A05, 0x000A0A}, {0x000A0F, 0x000A10}, {0x000A13, 0x000A28}, {0x000A2A, 0x000A30},
    {0x000A32, 0x000A33}, {0x000A35, 0x000A36}, {0x000A38, 0x000A39}, {0x000A59, 0x000A5C},
    {0x000A5E, 0x000A5E}, {0x000A72, 0x000A74}, {0x000A85, 0x000A8D}, {0x000A8F, 0x000A91},
    {0x000A93, 0x000AA8}, {0x000AAA, 0x000AB0}, {0x000AB2, 0x000AB3}, {0x000AB5, 0x000AB9},
    {0x000ABD, 0x000ABD}, {0x000AD0, 0x000AD0}, {0x000AE0, 0x000AE1}, {0x000AF9, 0x000AF9},
    {0x000B05, 0x000B0C}, {0x000B0F, 0x000B10}, {0x000B13, 0x000B28}, {0x000B2A, 0x000B30},
    {0x000B32, 0x000B33}, {0x000B35, 0x000B39}, {0x000B3D, 0x000B3D}, {0x000B5C, 0x000B5D},
    {0x000B5F, 0x000B61}, {0x000B71, 0x000B71}, {0x000B83, 0x000B83}, {0x000B85, 0x000B8A},
    {0x000B8E, 0x000B90}, {0x000B92, 0x000B95}, {0x000B99, 0x000B9A}, {0x000B9C, 0x000B9C},
    {0x000B9E, 0x000B9F}, {0x000BA3, 0x000BA4}, {0x000BA8, 0x000BAA}, {0x000BAE, 0x000BB9},
    {0x000BD0, 0x000BD0}, {0x000C05, 0x000C0C}, {0x000C0E, 0x000C10}, {0x000C12, 0x000C28},
    {0x000C2A, 0x000C39}, {0x000C3D, 0x000C3D}, {0x000C58, 0x000C5A}, {0x000C60, 0x000C61},
    {0x000C80, 0x000C80}, {0x000C85, 0x000C8C}, {0x000C8E, 0x000C90}, {0x000C92, 0x000CA8},
    {0x000CAA, 0x000CB3}, {0x000CB5, 0x000CB9}, {0x000CBD, 0x000CBD}, {0x000CDE, 0x000CDE},
    {0x000CE0, 0x000CE1}, {0x000CF1, 0x000CF2}, {0x000D04, 0x000D0C}, {0x000D0E, 0x000D10},
    {0x000D12, 0x000D3A}, {0x000D3D, 0x000D3D}, {0x000D4E, 0x000D4E}, {0x000D54, 0x000D56},
    {0x000D5F, 0x000D61}, {0x000D7A, 0x000D7F}, {0x000D85, 0x000D96}, {0x000D9A, 0x000DB1},
    {0x000DB3, 0x000DBB}, {0x000DBD, 0x000DBD}, {0x000DC0, 0x000DC6}, {0x000E01, 0x000E30},
    {0x000E32, 0x000E33}, {0x000E40, 0x000E46}, {0x000E81, 0x000E82}, {0x000E84, 0x000E84},
    {0x000E86, 0x000E8A}, {0x000E8C, 0x000EA3}, {0x000EA5, 0x000EA5}, {0x000EA7, 0x000EB0},
    {0x000EB2, 0x000EB3}, {0x000EBD, 0x000EBD}, {0x000EC0, 0x000EC4}, {0x000EC6, 0x000EC6},
    {0x000EDC, 0x000EDF}, {0x000F00, 0x000F00}, {0x000F40, 0x000F47}, {0x000F49, 0x000F6C},
    {0x000F88, 0x000F8C}, {0x001000, 0x00102A}, {0x00103F, 0x00103F}, {0x001050, 0x001055},
    {0x00105A, 0x00105D}, {0x001061, 0x001061}, {0x001065, 0x001066}, {0x00106E, 0x001070},
    {0x001075, 0x001081}, {0x00108E, 0x00108E}, {0x0010A0, 0x0010C5}, {0x0010C7, 0x0010C7},
    {0x0010CD, 0x0010CD}, {0x0010D0, 0x0010FA}, {0x0010FC, 0x001248}, {0x00124A, 0x00124D},
    {0x001250, 0x001256}, {0x001258, 0x001258}, {0x00125A, 0x00125D}, {0x001260, 0x001288},
    {0x00128A, 0x00128D}, {0x001290, 0x0012B0}, {0x0012B2, 0x0012B5}, {0x0012B8, 0x0012BE},
    {0x0012C0, 0x0012C0}, {0x0012C2, 0x0012C5}, {0x0012C8, 0x0012D6}, {0x0012D8, 0x001310},
    {0x001312, 0x001315}, {0x001318, 0x00135A}, {0x001380, 0x00138F}, {0x0013A0, 0x0013F5},
    {0x0013F8, 0x0013FD}, {0x001401, 0x00166C}, {0x00166F, 0x00167F}, {0x001681, 0x00169A},
    {0x0016A0, 0x0016EA}, {0x0016F1, 0x0016F8}, {0x001700, 0x00170C}, {0x00170E, 0x001711},
    {0x001720, 0x001731}, {0x001740, 0x001751}, {0x001760, 0x00176C}, {0x00176E, 0x001770},
    {0x001780, 0x0017B3}, {0x0017D7, 0x0017D7}, {0x0017DC, 0x0017DC}, {0x001820, 0x001878},
    {0x001880, 0x001884}, {0x001887, 0x0018A8}, {0x0018AA, 0x0018AA}, {0x0018B0, 0x0018F5},
    {0x001900, 0x00191E}, {0x001950, 0x00196D}, {0x001970, 0x001974}, {0x001980, 0x0019AB},
    {0x0019B0, 0x0019C9}, {0x001A00, 0x001A16}, {0x001A20, 0x001A54}, {0x001AA7, 0x001AA7},
    {0x001B05, 0x001B33}, {0x001B45, 0x001B4B}, {0x001B83, 0x001BA0}, {0x001BAE, 0x001BAF},
    {0x001BBA, 0x001BE5}, {0x001C00, 0x001C23}, {0x001C4D, 0x001C4F}, {0x001C5A, 0x001C7D},
    {0x001C80, 0x001C88}, {0x001C90, 0x001CBA}, {0x001CBD, 0x001CBF}, {0x001CE9, 0x001CEC},
    {0x001CEE, 0x001CF3}, {0x001CF5, 0x001CF6}, {0x001CFA, 0x001CFA}, {0x001D00, 0x001DBF},
    {0x001E00, 0x001F15}, {0x001F18, 0x001F1D}, {0x001F20, 0x001F45}, {0x001F48, 0x001F4D},
    {0x001F50, 0x001F57}, {0x001F59, 0x001F59}, {0x001F5B, 0x001F5B}, {0x001F5D, 0x001F5D},
    {0x001F5F, 0x001F7D}, {0x001F80, 0x001FB4}, {0x001FB6, 0x001FBC}, {0x001FBE, 0x001FBE},
    {0x001FC2, 0x001FC4}, {0x001FC6, 0x001FCC}, {0x001FD0, 0x001FD3}, {0x001FD6, 0x001FDB},
    {0x001FE0, 0x001FEC}, {0x001FF2, 0x001FF4}, {0x001FF6, 0x001FFC}, {0x002071, 0x002071},
    {0x00207F, 0x00207F}, {0x002090, 0x00209C}, {0x002102, 0x002102}, {0x002107, 0x002107},
    {0x00210A, 0x002113}, {0x002115, 0x002115}, {0x002119, 0x00211D}, {0x002124, 0x002124},
    {0x002126, 0x002126}, {0x002128, 0x002128}, {0x00212A, 0x00212D}, {0x00212F, 0x002139},
    {0x00213C, 0x00213F}, {0x002145, 0x002149}, {0x00214E, 0x00214E}, {0x002183, 0x002184},
    {0x002C00, 0x002C2E}, {0x002C30, 0x002C5E}, {0x002C60, 0x002CE4}, {0x002CEB, 0x002CEE},
    {0x002CF2, 0x002CF3}, {0x002D00, 0x002D25}, {0x002D27, 0x002D27}, {0x002D2D, 0x002D2D},
    {0x002D30, 0x002D67}, {0x002D6F, 0x002D6F}, {0x002D80, 0x002D96}, {0x002DA0, 0x002DA6},
    {0x002DA8, 0x002DAE}, {0x002DB0, 0x002DB6}, {0x002DB8, 0x002DBE}, {0x002DC0, 0x002DC6},
    {0x002DC8, 0x002DCE}, {0x002DD0, 0x002DD6}, {0x002DD8, 0x002DDE}, {0x002E2F, 0x002E2F},
    {0x003005, 0x003006}, {0x003031, 0x003035}, {0x00303B, 0x00303C}, {0x003041, 0x003096},
    {0x00309D, 0x00309F}, {0x0030A1, 0x0030FA}, {0x0030FC, 0x0030FF}, {0x003105, 0x00312F},
    {0x003131, 0x00318E}, {0x0031A0, 0x0031BF}, {0x0031F0, 0x0031FF}, {0x003400, 0x004DBF},
    {0x004E00, 0x009FFC}, {0x00A000, 0x00A48C}, {0x00A4D0, 0x00A4FD}, {0x00A500, 0x00A60C},
    {0x00A610, 0x00A61F}, {0x00A62A, 0x00A62B}, {0x00A640, 0x00A66E}, {0x00A67F, 0x00A69D},
    {0x00A6A0, 0x00A6E5}, {0x00A717, 0x00A71F}, {0x00A722, 0x00A788}, {0x00A78B, 0x00A7BF},
    {0x00A7C2, 0x00A7CA}, {0x00A7F5, 0x00A801}, {0x00A803, 0x00A805}, {0x00A807, 0x00A80A},
    {0x00A80C, 0x00A822}, {0x00A840, 0x00A873}, {0x00A882, 0x00A8B3}, {0x00A8F2, 0x00A8F7},
    {0x00A8FB, 0x00A8FB}, {0x00A8FD, 0x00A8FE}, {0x00A90A, 0x00A925}, {0x00A930, 0x00A946},
    {0x00A960, 0x00A97C}, {0x00A984, 0x00A9B2}, {0x00A9CF, 0x00A9CF}, {0x00A9E0, 0x00A9E4},
    {0x00A9E6, 0x00A9EF}, {0x00A9FA, 0x00A9FE}, {0x00AA00, 0x00AA28}, {0x00AA40, 0x00AA42},
    {0x00AA44, 0x00AA4B}, {0x00AA60, 0x00AA76}, {0x00AA7A, 0x00AA7A}, {0x00AA7E, 0x00AAAF},
    {0x00AAB1, 0x00AAB1}, {0x00AAB5, 0x00AAB6}, {0x00AAB9, 0x00AABD}, {0x00AAC0, 0x00AAC0},
    {0x00AAC2, 0x00AAC2}, {0x00AADB, 0x00AADD}, {0x00AAE0, 0x00AAEA}, {0x00AAF2, 0x00AAF4},
    {0x00AB01, 0x00AB06}, {0x00AB09, 0x00AB0E}, {0x00AB11, 0x00AB16}, {0x00AB20, 0x00AB26},
    {0x00AB28, 0x00AB2E}, {0x00AB30, 0x00AB5A}, {0x00AB5C, 0x00AB69}, {0x00AB70, 0x00ABE2},
    {0x00AC00, 0x00D7A3}, {0x00D7B0, 0x00D7C6}, {0x00D7CB, 0x00D7FB}, {0x00F900, 0x00FA6D},
    {0x00FA70, 0x00FAD9}, {0x00FB00, 0x00FB06}, {0x00FB13, 0x00FB17}, {0x00FB1D, 0x00FB1D},
    {0x00FB1F, 0x00FB28}, {0x00FB2A, 0x00FB36}, {0x00FB38, 0x00FB3C}, {0x00FB3E, 0x00FB3E},
    {0x00FB40, 0x00FB41}, {0x00FB43, 0x00FB44}, {0x00FB46, 0x00FBB1}, {0x00FBD3, 0x00FD3D},
    {0x00FD50, 0x00FD8F}, {0x00FD92, 0x00FDC7}, {0x00FDF0, 0x00FDFB}, {0x00FE70, 0x00FE74},
    {0x00FE76, 0x00FEFC}, {0x00FF21, 0x00FF3A}, {0x00FF41, 0x00FF5A}, {0x00FF66, 0x00FFBE},
    {0x00FFC2, 0x00FFC7}, {0x00FFCA, 0x00FFCF}, {0x00FFD2, 0x00FFD7}, {0x00FFDA, 0x00FFDC},
    {0x010000, 0x01000B}, {0x01000D, 0x010026}, {0x010028, 0x01003A}, {0x01003C, 0x01003D},
    {0x01003F, 0x01004D}, {0x010050, 0x01005D}, {0x010080, 0x0100FA}, {0x010280, 0x01029C},
    {0x0102A0, 0x0102D0}, {0x010300, 0x01031F}, {0x01032D, 0x010340}, {0x010342, 0x010349},
    {0x010350, 0x010375}, {0x010380, 0x01039D}, {0x0103A0, 0x0103C3}, {0x0103C8, 0x0103CF},
    {0x010400, 0x01049D}, {0x0104B0, 0x0104D3}, {0x0104D8, 0x0104FB}, {0x010500, 0x010527},
    {0x010530, 0x010563}, {0x010600, 0x010736}, {0x010740, 0x010755}, {0x010760, 0x010767},
    {0x010800, 0x010805}, {0x010808, 0x010808}, {0x01080A, 0x010835}, {0x010837, 0x010838},
    {0x01083C, 0x01083C}, {0x01083F, 0x010855}, {0x010860, 0x010876}, {0x010880, 0x01089E},
    {0x0108E0, 0x0108F2}, {0x0108F4, 0x0108F5}, {0x010900, 0x010915}, {0x010920, 0x010939},
    {0x010980, 0x0109B7}, {0x0109BE, 0x0109BF}, {0x010A00, 0x010A00}, {0x010A10, 0x010A13},
    {0x010A15, 0x010A17}, {0x010A19, 0x010A35}, {0x010A60, 0x010A7C}, {0x010A80, 0x010A9C},
    {0x010AC0, 0x010AC7}, {0x010AC9, 0x010AE4}, {0x010B00, 0x010B35}, {0x010B40, 0x010B55},
    {0x010B60, 0x010B72}, {0x010B80, 0x010B91}, {0x010C00, 0x010C48}, {0x010C80, 0x010CB2},
    {0x010CC0, 0x010CF2}, {0x010D00, 0x010D23}, {0x010E80, 0x010EA9}, {0x010EB0, 0x010EB1},
    {0x010F00, 0x010F1C}, {0x010F27, 0x010F27}, {0x010F30, 0x010F45}, {0x010FB0, 0x010FC4},
    {0x010FE0, 0x010FF6}, {0x011003, 0x011037}, {0x011083, 0x0110AF}, {0x0110D0, 0x0110E8},
    {0x011103, 0x011126}, {0x011144, 0x011144}, {0x011147, 0x011147}, {0x011150, 0x011172},
    {0x011176, 0x011176}, {0x011183, 0x0111B2}, {0x0111C1, 0x0111C4}, {0x0111DA, 0x0111DA},
    {0x0111DC, 0x0111DC}, {0x011200, 0x011211}, {0x011213, 0x01122B}, {0x011280, 0x011286},
    {0x011288, 0x011288}, {0x01128A, 0x01128D}, {0x01128F, 0x01129D}, {0x01129F, 0x0112A8},
    {0x0112B0, 0x0112DE}, {0x011305, 0x01130C}, {0x01130F, 0x011310}, {0x011313, 0x011328},
    {0x01132A, 0x011330}, {0x011332, 0x011333}, {0x011335, 0x011339}, {0x01133D, 0x01133D},
    {0x011350, 0x011350}, {0x01135D, 0x011361}, {0x011400, 0x011434}, {0x011447, 0x01144A},
    {0x01145F, 0x011461}, {0x011480, 0x0114AF}, {0x0114C4, 0x0114C5}, {0x0114C7, 0x0114C7},
    {0x011580, 0x0115AE}, {0x0115D8, 0x0115DB}, {0x011600, 0x01162F}, {0x011644, 0x011644},
    {0x011680, 0x0116AA}, {0x0116B8, 0x0116B8}, {0x011700, 0x01171A}, {0x011800, 0x01182B},
    {0x0118A0, 0x0118DF}, {0x0118FF, 0x011906}, {0x011909, 0x011909}, {0x01190C, 0x011913},
    {0x011915, 0x011916}, {0x011918, 0x01192F}, {0x01193F, 0x01193F}, {0x011941, 0x011941},
    {0x0119A0, 0x0119A7}, {0x0119AA, 0x0119D0}, {0x0119E1, 0x0119E1}, {0x0119E3, 0x0119E3},
    {0x011A00, 0x011A00}, {0x011A0B, 0x011A32}, {0x011A3A, 0x011A3A}, {0x011A50, 0x011A50},
    {0x011A5C, 0x011A89}, {0x011A9D, 0x011A9D}, {0x011AC0, 0x011AF8}, {0x011C00, 0x011C08},
    {0x011C0A, 0x011C2E}, {0x011C40, 0x011C40}, {0x011C72, 0x011C8F}, {0x011D00, 0x011D06},
    {0x011D08, 0x011D09}, {0x011D0B, 0x011D30}, {0x011D46, 0x011D46}, {0x011D60, 0x011D65},
    {0x011D67, 0x011D68}, {0x011D6A, 0x011D89}, {0x011D98, 0x011D98}, {0x011EE0, 0x011EF2},
    {0x011FB0, 0x011FB0}, {0x012000, 0x012399}, {0x012480, 0x012543}, {0x013000, 0x01342E},
    {0x014400, 0x014646}, {0x016800, 0x016A38}, {0x016A40, 0x016A5E}, {0x016AD0, 0x016AED},
    {0x016B00, 0x016B2F}, {0x016B40, 0x016B43}, {0x016B63, 0x016B77}, {0x016B7D, 0x016B8F},
    {0x016E40, 0x016E7F}, {0x016F00, 0x016F4A}, {0x016F50, 0x016F50}, {0x016F93, 0x016F9F},
    {0x016FE0, 0x016FE1}, {0x016FE3, 0x016FE3}, {0x017000, 0x0187F7}, {0x018800, 0x018CD5},
    {0x018D00, 0x018D08}, {0x01B000, 0x01B11E}, {0x01B150, 0x01B152}, {0x01B164, 0x01B167},
    {0x01B170, 0x01B2FB}, {0x01BC00, 0x01BC6A}, {0x01BC70, 0x01BC7C}, {0x01BC80, 0x01BC88},
    {0x01BC90, 0x01BC99}, {0x01D400, 0x01D454}, {0x01D456, 0x01D49C}, {0x01D49E, 0x01D49F},
    {0x01D4A2, 0x01D4A2}, {0x01D4A5, 0x01D4A6}, {0x01D4A9, 0x01D4AC}, {0x01D4AE, 0x01D4B9},
    {0x01D4BB, 0x01D4BB}, {0x01D4BD, 0x01D4C3}, {0x01D4C5, 0x01D505}, {0x01D507, 0x01D50A},
    {0x01D50D, 0x01D514}, {0x01D516, 0x01D51C}, {0x01D51E, 0x01D539}, {0x01D53B, 0x01D53E},
    {0x01D540, 0x01D544}, {0x01D546, 0x01D546}, {0x01D54A, 0x01D550}, {0x01D552, 0x01D6A5},
    {0x01D6A8, 0x01D6C0}, {0x01D6C2, 0x01D6DA}, {0x01D6DC, 0x01D6FA}, {0x01D6FC, 0x01D714},
    {0x01D716, 0x01D734}, {0x01D736, 0x01D74E}, {0x01D750, 0x01D76E}, {0x01D770, 0x01D788},
    {0x01D78A, 0x01D7A8}, {0x01D7AA, 0x01D7C2}, {0x01D7C4, 0x01D7CB}, {0x01E100, 0x01E12C},
    {0x01E137, 0x01E13D}, {0x01E14E, 0x01E14E}, {0x01E2C0, 0x01E2EB}, {0x01E800, 0x01E8C4},
    {0x01E900, 0x01E943}, {0x01E94B, 0x01E94B}, {0x01EE00, 0x01EE03}, {0x01EE05, 0x01EE1F},
    {0x01EE21, 0x01EE22}, {0x01EE24, 0x01EE24}, {0x01EE27, 0x01EE27}, {0x01EE29, 0x01EE32},
    {0x01EE34, 0x01EE37}, {0x01EE39, 0x01EE39}, {0x01EE3B, 0x01EE3B}, {0x01EE42, 0x01EE42},
    {0x01EE47, 0x01EE47}, {0x01EE49, 0x01EE49}, {0x01EE4B, 0x01EE4B}, {0x01EE4D, 0x01EE4F},
    {0x01EE51, 0x01EE52}, {0x01EE54, 0x01EE54}, {0x01EE57, 0x01EE57}, {0x01EE59, 0x01EE59},
    {0x01EE5B, 0x01EE5B}, {0x01EE5D, 0x01EE5D}, {0x01EE5F, 0x01EE5F}, {0x01EE61, 0x01EE62},
    {0x01EE64, 0x01EE64}, {0x01EE67, 0x01EE6A}, {0x01EE6C, 0x01EE72}, {0x01EE74, 0x01EE77},
    {0x01EE79, 0x01EE7C}, {0x01EE7E, 0x01EE7E}, {0x01EE80, 0x01EE89}, {0x01EE8B, 0x01EE9B},
    {0x01EEA1, 0x01EEA3}, {0x01EEA5, 0x01EEA9}, {0x01EEAB, 0x01EEBB}, {0x020000, 0x02A6DD},
    {0x02A700, 0x02B734}, {0x02B740, 0x02B81D}, {0x02B820, 0x02CEA1}, {0x02CEB0, 0x02EBE0},
    {0x02F800, 0x02FA1D}, {0x030000, 0x03134A},
};

constexpr CodepointRange kNumber[] = {
    {0x000030, 0x000039}, {0x0000B2, 0x0000B3}, {0x0000B9, 0x0000B9}, {0x0000BC, 0x0000BE},
    {0x000660, 0x000669}, {0x0006F0, 0x0006F9}, {0x0007C0, 0x0007C9}, {0x000966, 0x00096F},
    {0x0009E6, 0x0009EF}, {0x0009F4, 0x0009F9}, {0x000A66, 0x000A6F}, {0x000AE6, 0x000AEF},
    {0x000B66, 0x000B6F}, {0x000B72, 0x000B77}, {0x000BE6, 0x000BF2}, {0x000C66, 0x000C6F},
    {0x000C78, 0x000C7E}, {0x000CE6, 0x000CEF}, {0x000D58, 0x000D5E}, {0x000D66, 0x000D78},
    {0x000DE6, 0x000DEF}, {0x000E50, 0x000E59}, {0x000ED0, 0x000ED9}, {0x000F20, 0x000F33},
    {0x001040, 0x001049}, {0x001090, 0x001099}, {0x001369, 0x00137C}, {0x0016EE, 0x0016F0},
    {0x0017E0, 0x0017E9}, {0x0017F0, 0x0017F9}, {0x001810, 0x001819}, {0x001946, 0x00194F},
    {0x0019D0, 0x0019DA}, {0x001A80, 0x001A89}, {0x001A90, 0x001A99}, {0x001B50, 0x001B59},
    {0x001BB0, 0x001BB9}, {0x001C40, 0x001C49}, {0x001C50, 0x001C59}, {0x002070, 0x002070},
    {0x002074, 0x002079}, {0x002080, 0x002089}, {0x002150, 0x002182}, {0x002185, 0x002189},
    {0x002460, 0x00249B}, {0x0024EA, 0x0024FF}, {0x002776, 0x002793}, {0x002CFD, 0x002CFD},
    {0x003007, 0x003007}, {0x003021, 0x003029}, {0x003038, 0x00303A}, {0x003192, 0x003195},
    {0x003220, 0x003229}, {0x003248, 0x00324F}, {0x003251, 0x00325F}, {0x003280, 0x003289},
    {0x0032B1, 0x0032BF}, {0x00A620, 0x00A629}, {0x00A6E6, 0x00A6EF}, {0x00A830, 0x00A835},
    {0x00A8D0, 0x00A8D9}, {0x00A900, 0x00A909}, {0x00A9D0, 0x00A9D9}, {0x00A9F0, 0x00A9F9},
    {0x00AA50, 0x00AA59}, {0x00ABF0, 0x00ABF9}, {0x00FF10, 0x00FF19}, {0x010107, 0x010133},
    {0x010140, 0x010178}, {0x01018A, 0x01018B}, {0x0102E1, 0x0102FB}, {0x010320, 0x010323},
    {0x010341, 0x010341}, {0x01034A, 0x01034A}, {0x0103D1, 0x0103D5}, {0x0104A0, 0x0104A9},
    {0x010858, 0x01085F}, {0x010879, 0x01087F}, {0x0108A7, 0x0108AF}, {0x0108FB, 0x0108FF},
    {0x010916, 0x01091B}, {0x0109BC, 0x0109BD}, {0x0109C0, 0x0109CF}, {0x0109D2, 0x0109FF},
    {0x010A40, 0x010A48}, {0x010A7D, 0x010A7E}, {0x010A9D, 0x010A9F}, {0x010AEB, 0x010AEF},
    {0x010B58, 0x010B5F}, {0x010B78, 0x010B7F}, {0x010BA9, 0x010BAF}, {0x010CFA, 0x010CFF},
    {0x010D30, 0x010D39}, {0x010E60, 0x010E7E}, {0x010F1D, 0x010F26}, {0x010F51, 0x010F54},
    {0x010FC5, 0x010FCB}, {0x011052, 0x01106F}, {0x0110F0, 0x0110F9}, {0x011136, 0x01113F},
    {0x0111D0, 0x0111D9}, {0x0111E1, 0x0111F4}, {0x0112F0, 0x0112F9}, {0x011450, 0x011459},
    {0x0114D0, 0x0114D9}, {0x011650, 0x011659}, {0x0116C0, 0x0116C9}, {0x011730, 0x01173B},
    {0x0118E0, 0x0118F2}, {0x011950, 0x011959}, {0x011C50, 0x011C6C}, {0x011D50, 0x011D59},
    {0x011DA0, 0x011DA9}, {0x011FC0, 0x011FD4}, {0x012400, 0x01246E}, {0x016A60, 0x016A69},
    {0x016B50, 0x016B59}, {0x016B5B, 0x016B61}, {0x016E80, 0x016E96}, {0x01D2E0, 0x01D2F3},
    {0x01D360, 0x01D378}, {0x01D7CE, 0x01D7FF}, {0x01E140, 0x01E149}, {0x01E2F0, 0x01E2F9},
    {0x01E8C7, 0x01E8CF}, {0x01E950, 0x01E959}, {0x01EC71, 0x01ECAB}, {0x01ECAD, 0x01ECAF},
    {0x01ECB1, 0x01ECB4}, {0x01ED01, 0x01ED2D}, {0x01ED2F, 0x01ED3D}, {0x01F100, 0x01F10C},
    {0x01FBF0, 0x01FBF9},
};

constexpr CodepointRange kSeparator[] = {
    {0x000020, 0x000020}, {0x0000A0, 0x0000A0}, {0x001680, 0x001680}, {0x002000, 0x00200A},
    {0x002028, 0x002029}, {0x00202F, 0x00202F}, {0x00205F, 0x00205F}, {0x003000, 0x003000},
};

bool in_ranges(char32_t cp, const CodepointRange* table, std::size_t n) {
    std::size_t lo = 0, hi = n;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (cp > table[mid].hi) {
            lo = mid + 1;
        } else if (cp < table[mid].lo) {
            hi = mid;
        } else {
            return true;
        }
    }
    return false;
}

}  // namespace

bool is_punctuation(char32_t cp) { return in_ranges(cp, kPunctuation, std::size(kPunctuation)); }
bool is_symbol(char32_t cp) { return in_ranges(cp, kSymbol, std::size(kSymbol)); }
bool is_letter(char32_t cp) { return in_ranges(cp, kLetter, std::size(kLetter)); }
bool is_number(char32_t cp) { return in_ranges(cp, kNumber, std::size(kNumber)); }
bool is_separator(char32_t cp) { return in_ranges(cp, kSeparator, std::size(kSeparator)); }

}  // namespace miniens::text