use std::collections::HashMap;

use super::RawTrade;

/// Collapses trades sharing `(nft_id, ts, buyer, seller)` to the copy from
/// the highest-priority source. Among equal priorities the first occurrence
/// wins. Survivors keep their relative input order.
pub fn deduplicate(records: Vec<RawTrade>) -> Vec<RawTrade> {
    let mut best: HashMap<(&str, i64, &str, &str), usize> = HashMap::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        let key = (r.nft_id.as_str(), r.ts, r.buyer.as_str(), r.seller.as_str());
        best.entry(key)
            .and_modify(|j| {
                if r.source.priority() < records[*j].source.priority() {
                    *j = i;
                }
            })
            .or_insert(i);
    }
    let mut keep = vec![false; records.len()];
    for i in best.into_values() {
        keep[i] = true;
    }
    records.into_iter().zip(keep).filter_map(|(r, k)| k.then_some(r)).collect()
}
